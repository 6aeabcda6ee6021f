//! Desk-scale two-stage regression training: the luma network first, then
//! the color network with luma weights frozen. Full-batch (up to `batch`
//! patches per step, cycled in order), deterministic for a fixed seed.

use std::path::Path;

use super::patches::PatchPair;
use crate::coeff::{
    compute_normalization_stats, image_to_coefficients, normalize_plane, pixel_upsample_coefficient_plane, NormalizationStats,
};
use crate::error::{Error, Result};
use crate::jpeg::{decode_jpeg_coefficients, pad_to_mcu, rgb_to_ycbcr, ChannelRole, CoefficientPlane, Image, QuantMatrix, Subsampling};
use crate::losses::{coefficients_to_unit_pixels, l_jpeg};
use crate::model::{denormalize_tensor, is_luma_param, qnorm_tensor, ModelCheckpoint, NetworkConfig};
use crate::nn::{Adam, AdamConfig, LrSchedule, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub network: NetworkConfig,
    pub y_steps: u64,
    pub color_steps: u64,
    /// Patches per step (at most 8).
    pub batch: usize,
    pub lambda: f64,
    pub seed: u64,
    pub y_schedule: LrSchedule,
    pub color_schedule: LrSchedule,
}

impl TrainConfig {
    /// The published schedules compressed to `steps`: the luma stage halves
    /// its rate every quarter, the color stage anneals 1e-3 → 1e-6.
    pub fn smoke(steps: u64, seed: u64) -> Self {
        let steps = steps.max(1);
        Self {
            network: NetworkConfig::toy(),
            y_steps: steps,
            color_steps: steps,
            batch: 8,
            lambda: 0.05,
            seed,
            y_schedule: LrSchedule::StepDecay {
                base: 1e-3,
                period: (steps / 4).max(1),
                floor: 1e-6,
            },
            color_schedule: LrSchedule::Cosine {
                base: 1e-3,
                final_lr: 1e-6,
                total: steps,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.y_schedule.validate()?;
        self.color_schedule.validate()?;
        if self.batch == 0 || self.batch > 8 {
            return Err(Error::Config(format!("batch {} must be within 1..=8", self.batch)));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::Config(format!("lambda {} must be non-negative", self.lambda)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStage {
    Luma,
    Color,
}

impl std::fmt::Display for TrainStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrainStage::Luma => "y",
            TrainStage::Color => "color",
        })
    }
}

/// Loss before the update of one step. `loss` is `L1 + λ(1 − SSIM)`, the
/// regression loss shifted by λ so it is non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub stage: TrainStage,
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: ModelCheckpoint,
    pub log: Vec<StepLog>,
    /// Shifted luma loss over all patches before and after the luma stage.
    pub y_initial: f64,
    pub y_final: f64,
    /// The same for chroma; `None` when the corpus is not 4:2:0.
    pub color_initial: Option<f64>,
    pub color_final: Option<f64>,
}

impl TrainOutcome {
    pub fn write_log_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["stage", "step", "lr", "loss"])?;
        for s in &self.log {
            w.write_record([s.stage.to_string(), s.step.to_string(), format!("{:e}", s.lr), format!("{:.17e}", s.loss)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-patch tensors, all unbatched `(1, 1, H, W)` data.
struct Sample {
    y_in: Vec<f64>,
    y_target: Vec<f64>,
    /// Cb then Cr, normalized, half resolution.
    c_in: [Vec<f64>; 2],
    /// Normalized pixel-upsampled chroma at luma resolution.
    c_base: [Vec<f64>; 2],
    c_target: [Vec<f64>; 2],
}

struct Corpus {
    samples: Vec<Sample>,
    luma_dims: (usize, usize),
    chroma_dims: Option<(usize, usize)>,
    q_luma: QuantMatrix,
    q_chroma: Option<QuantMatrix>,
}

fn unit_pixels(img: &Image, plane: usize, mcu: usize) -> Result<Vec<f64>> {
    Ok(pad_to_mcu(img.plane(plane), mcu)?.samples().iter().map(|&v| v as f64 / 255.0).collect())
}

fn fit_stats(pairs: &[PatchPair], subsampling: Subsampling) -> Result<NormalizationStats> {
    let mut luma = Vec::new();
    let mut chroma = Vec::new();
    for p in pairs {
        let c = image_to_coefficients(&p.original, subsampling)?;
        luma.push(c.y);
        chroma.extend(c.cb);
        chroma.extend(c.cr);
    }
    let luma = compute_normalization_stats(&luma, ChannelRole::Luma)?;
    let chroma = if chroma.is_empty() {
        crate::coeff::FrequencyStats::identity(ChannelRole::Chroma)
    } else {
        compute_normalization_stats(&chroma, ChannelRole::Chroma)?
    };
    Ok(NormalizationStats { luma, chroma })
}

/// Luma size, chroma size and tables; every patch must agree.
type Layout = (usize, usize, Option<(usize, usize)>, QuantMatrix, Option<QuantMatrix>);

fn build_corpus(pairs: &[PatchPair], stats: &NormalizationStats) -> Result<Corpus> {
    let mut samples = Vec::new();
    let mut shape: Option<Layout> = None;
    for p in pairs {
        let (coeffs, _) = decode_jpeg_coefficients(&p.jpeg)?;
        let color = coeffs.subsampling == Subsampling::S420 && !coeffs.is_gray();
        let cb = coeffs.cb.as_ref().filter(|_| color);
        let cr = coeffs.cr.as_ref().filter(|_| color);
        let this = (
            coeffs.y.height(),
            coeffs.y.width(),
            cb.map(|c| (c.height(), c.width())),
            coeffs.y.quant,
            cb.map(|c| c.quant),
        );
        if cb.is_some() && cb.map(|c| c.quant) != cr.map(|c| c.quant) {
            return Err(Error::Config(format!("{}: Cb and Cr use different tables", p.name)));
        }
        match &shape {
            None => shape = Some(this),
            Some(s) if *s != this => {
                return Err(Error::Config(format!(
                    "{}: patches must share size, subsampling and quantization tables",
                    p.name
                )))
            }
            _ => {}
        }
        let ycc = if p.original.is_gray() { p.original.clone() } else { rgb_to_ycbcr(&p.original)? };
        let mcu = coeffs.subsampling.mcu_size();
        let norm = |plane: &CoefficientPlane, role: ChannelRole| normalize_plane(plane, stats.for_role(role)).map(|p| p.values);
        let empty = || [Vec::new(), Vec::new()];
        let (c_in, c_base, c_target) = match (cb, cr) {
            (Some(cb), Some(cr)) => (
                [norm(cb, ChannelRole::Chroma)?, norm(cr, ChannelRole::Chroma)?],
                [
                    norm(&pixel_upsample_coefficient_plane(cb), ChannelRole::Chroma)?,
                    norm(&pixel_upsample_coefficient_plane(cr), ChannelRole::Chroma)?,
                ],
                [unit_pixels(&ycc, 1, mcu)?, unit_pixels(&ycc, 2, mcu)?],
            ),
            _ => (empty(), empty(), empty()),
        };
        samples.push(Sample {
            y_in: norm(&coeffs.y, ChannelRole::Luma)?,
            y_target: unit_pixels(&ycc, 0, mcu)?,
            c_in,
            c_base,
            c_target,
        });
    }
    let (h, w, chroma_dims, q_luma, q_chroma) = shape.ok_or_else(|| Error::Config("no training patches".into()))?;
    Ok(Corpus {
        samples,
        luma_dims: (h, w),
        chroma_dims,
        q_luma,
        q_chroma,
    })
}

fn stack(parts: Vec<&[f64]>, (h, w): (usize, usize)) -> Tensor {
    let n = parts.len();
    Tensor::new([n, 1, h, w], parts.concat()).expect("stacked shape")
}

fn batch_indices(step: u64, batch: usize, n: usize) -> Vec<usize> {
    let b = batch.min(n);
    (0..b).map(|i| (step as usize * b + i) % n).collect()
}

fn shifted(loss: &Tensor, lambda: f64) -> Result<f64> {
    Ok(loss.item()? + lambda)
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    corpus: &'a Corpus,
    ckpt: ModelCheckpoint,
}

impl Trainer<'_> {
    fn y_loss(&self, idx: &[usize], trainable: bool) -> Result<(Tensor, crate::nn::Bindings<'_>)> {
        let model = self.ckpt.model()?;
        let b = self.ckpt.params.bind(move |n| trainable && is_luma_param(n));
        let c = self.corpus;
        let x = stack(idx.iter().map(|&i| c.samples[i].y_in.as_slice()).collect(), c.luma_dims);
        let target = stack(idx.iter().map(|&i| c.samples[i].y_target.as_slice()).collect(), c.luma_dims);
        let out = model.y.forward(&b, &x, &qnorm_tensor(&c.q_luma))?;
        let px = coefficients_to_unit_pixels(&denormalize_tensor(&out, &self.ckpt.stats.luma)?)?;
        Ok((l_jpeg(&px, &target, self.cfg.lambda)?, b))
    }

    /// Normalized restored luma for every patch under the current (frozen) weights.
    fn restored_luma(&self) -> Result<Vec<Vec<f64>>> {
        let model = self.ckpt.model()?;
        let b = self.ckpt.params.bind_frozen();
        let c = self.corpus;
        c.samples
            .iter()
            .map(|s| {
                let x = stack(vec![s.y_in.as_slice()], c.luma_dims);
                Ok(model.y.forward(&b, &x, &qnorm_tensor(&c.q_luma))?.to_vec())
            })
            .collect()
    }

    fn color_loss(&self, idx: &[usize], guide: &[Vec<f64>], trainable: bool) -> Result<(Tensor, crate::nn::Bindings<'_>)> {
        let model = self.ckpt.model()?;
        let b = self.ckpt.params.bind(move |n| trainable && !is_luma_param(n));
        let c = self.corpus;
        let (cdims, q_chroma) = match (c.chroma_dims, c.q_chroma) {
            (Some(d), Some(q)) => (d, q),
            _ => return Err(Error::Config("color stage needs 4:2:0 patches".into())),
        };
        let pick = |f: &dyn Fn(&Sample, usize) -> &[f64]| -> Vec<&[f64]> {
            idx.iter().flat_map(|&i| (0..2).map(move |k| (i, k))).map(|(i, k)| f(&c.samples[i], k)).collect()
        };
        let chroma = stack(pick(&|s, k| s.c_in[k].as_slice()), cdims);
        let base = stack(pick(&|s, k| s.c_base[k].as_slice()), c.luma_dims);
        let target = stack(pick(&|s, k| s.c_target[k].as_slice()), c.luma_dims);
        let luma = stack(idx.iter().flat_map(|&i| [guide[i].as_slice(), guide[i].as_slice()]).collect(), c.luma_dims);
        let residual = model.color.forward(&b, &chroma, &luma, &qnorm_tensor(&q_chroma), &qnorm_tensor(&c.q_luma))?;
        let out = base.add(&residual)?;
        let px = coefficients_to_unit_pixels(&denormalize_tensor(&out, &self.ckpt.stats.chroma)?)?;
        Ok((l_jpeg(&px, &target, self.cfg.lambda)?, b))
    }

    fn all_indices(&self) -> Vec<usize> {
        (0..self.corpus.samples.len()).collect()
    }
}

fn check_finite(v: f64, what: &str, step: u64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            what: what.into(),
            step: step as usize,
        })
    }
}

/// Trains a fresh network (normalization stats fitted on the originals) on
/// `pairs`, which must share size, subsampling and tables.
pub fn smoke_train(pairs: &[PatchPair], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::Config("no training patches".into()));
    }
    let subsampling = decode_jpeg_coefficients(&pairs[0].jpeg)?.0.subsampling;
    let stats = fit_stats(pairs, subsampling)?;
    let corpus = build_corpus(pairs, &stats)?;
    let mut t = Trainer {
        cfg,
        corpus: &corpus,
        ckpt: ModelCheckpoint::initialize(cfg.network, stats, cfg.seed)?,
    };
    let n = corpus.samples.len();
    let all = t.all_indices();
    let mut log = Vec::new();

    let y_initial = check_finite(shifted(&t.y_loss(&all, false)?.0, cfg.lambda)?, "luma loss", 0)?;
    let mut adam = Adam::new(AdamConfig::default());
    for step in 0..cfg.y_steps {
        let lr = cfg.y_schedule.lr_at(step);
        let (loss, grads) = {
            let (loss, b) = t.y_loss(&batch_indices(step, cfg.batch, n), true)?;
            loss.backward()?;
            (shifted(&loss, cfg.lambda)?, b.grads())
        };
        check_finite(loss, "luma loss", step)?;
        adam.step(&mut t.ckpt.params, &grads, lr)?;
        log.push(StepLog {
            stage: TrainStage::Luma,
            step,
            lr,
            loss,
        });
    }
    let y_final = check_finite(shifted(&t.y_loss(&all, false)?.0, cfg.lambda)?, "luma loss", cfg.y_steps)?;

    let (mut color_initial, mut color_final) = (None, None);
    if corpus.chroma_dims.is_some() && cfg.color_steps > 0 {
        let guide = t.restored_luma()?;
        color_initial = Some(shifted(&t.color_loss(&all, &guide, false)?.0, cfg.lambda)?);
        let mut adam = Adam::new(AdamConfig::default());
        for step in 0..cfg.color_steps {
            let lr = cfg.color_schedule.lr_at(step);
            let (loss, grads) = {
                let (loss, b) = t.color_loss(&batch_indices(step, cfg.batch, n), &guide, true)?;
                loss.backward()?;
                (shifted(&loss, cfg.lambda)?, b.grads())
            };
            check_finite(loss, "color loss", step)?;
            adam.step(&mut t.ckpt.params, &grads, lr)?;
            log.push(StepLog {
                stage: TrainStage::Color,
                step,
                lr,
                loss,
            });
        }
        color_final = Some(shifted(&t.color_loss(&all, &guide, false)?.0, cfg.lambda)?);
    }
    Ok(TrainOutcome {
        checkpoint: t.ckpt,
        log,
        y_initial,
        y_final,
        color_initial,
        color_final,
    })
}
