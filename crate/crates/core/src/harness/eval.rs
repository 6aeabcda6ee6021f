//! Dataset evaluation: every image compressed at every quality, scored as
//! decoded JPEG and optionally as restored by a checkpoint.
//!
//! CSV output starts with a schema comment line, then a header row. Dataset
//! means are unweighted means of per-image values and appear as rows whose
//! image is `MEAN`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::io::{image_id, list_images, read_image};
use crate::error::{Error, Result};
use crate::jpeg::{decode_jpeg_pixels, encode_jpeg, EncodeOptions, Image, Subsampling};
use crate::metrics::{evaluate, MetricsConvention};
use crate::model::{restore_image, ModelCheckpoint};

pub const EVAL_SCHEMA: &str = "# qgac-eval v1";
pub const MEAN_ID: &str = "MEAN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub dataset: String,
    pub image: String,
    pub quality: u8,
    pub variant: String,
    pub convention: String,
    pub psnr: f64,
    pub psnr_b: f64,
    pub ssim: f64,
    pub jpeg_bytes: usize,
}

impl EvaluationRecord {
    fn key(&self) -> (String, u8, String, String, String) {
        (self.dataset.clone(), self.quality, self.variant.clone(), self.convention.clone(), self.image.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub dataset: String,
    pub image: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct EvaluationRun {
    /// Per-image rows sorted by (dataset, image, quality, variant, convention).
    pub records: Vec<EvaluationRecord>,
    pub failures: Vec<Failure>,
}

/// Options shared by every image of a run.
#[derive(Clone, Copy)]
pub struct EvalOptions<'a> {
    pub qualities: &'a [u8],
    pub conventions: &'a [MetricsConvention],
    pub subsampling: Subsampling,
    pub checkpoint: Option<&'a ModelCheckpoint>,
}

/// Scores one image at every quality.
pub fn evaluate_image(dataset: &str, id: &str, original: &Image, opts: &EvalOptions<'_>) -> Result<Vec<EvaluationRecord>> {
    let mut out = Vec::new();
    for &q in opts.qualities {
        let jpeg = encode_jpeg(original, &EncodeOptions::new(q, opts.subsampling))?;
        let mut variants = vec![("jpeg", decode_jpeg_pixels(&jpeg)?)];
        if let Some(ckpt) = opts.checkpoint {
            variants.push(("restored", restore_image(&jpeg, ckpt)?));
        }
        for (variant, img) in &variants {
            for &c in opts.conventions {
                let m = evaluate(original, img, c)?;
                out.push(EvaluationRecord {
                    dataset: dataset.into(),
                    image: id.into(),
                    quality: q,
                    variant: (*variant).into(),
                    convention: c.to_string(),
                    psnr: m.psnr,
                    psnr_b: m.psnr_b,
                    ssim: m.ssim,
                    jpeg_bytes: jpeg.len(),
                });
            }
        }
    }
    Ok(out)
}

/// Evaluates in-memory images in parallel; per-image errors are collected.
pub fn evaluate_images(dataset: &str, images: &[(String, Image)], opts: &EvalOptions<'_>) -> EvaluationRun {
    let results: Vec<_> = images
        .par_iter()
        .map(|(id, img)| (id, evaluate_image(dataset, id, img, opts)))
        .collect();
    let mut run = EvaluationRun::default();
    for (id, r) in results {
        match r {
            Ok(rows) => run.records.extend(rows),
            Err(e) => run.failures.push(Failure {
                dataset: dataset.into(),
                image: id.clone(),
                message: e.to_string(),
            }),
        }
    }
    sort_records(&mut run.records);
    run
}

fn sort_records(records: &mut [EvaluationRecord]) {
    records.sort_by(|a, b| {
        (&a.dataset, &a.image, a.quality, &a.variant, &a.convention).cmp(&(&b.dataset, &b.image, b.quality, &b.variant, &b.convention))
    });
}

/// Evaluates every lossless image in the configured directories.
pub fn evaluate_dataset(config: &RunConfig) -> Result<EvaluationRun> {
    config.validate()?;
    config.check_paths()?;
    let ckpt = config.checkpoint.as_deref().map(ModelCheckpoint::load).transpose()?;
    let opts = EvalOptions {
        qualities: &config.qualities,
        conventions: &config.conventions,
        subsampling: config.subsampling,
        checkpoint: ckpt.as_ref(),
    };
    let mut run = EvaluationRun::default();
    for (i, dir) in config.input_dirs.iter().enumerate() {
        let dataset = config.dataset_name(i);
        let mut images = Vec::new();
        for path in list_images(dir)? {
            match read_image(&path) {
                Ok(img) => images.push((image_id(&path), img)),
                Err(e) => run.failures.push(Failure {
                    dataset: dataset.clone(),
                    image: image_id(&path),
                    message: e.to_string(),
                }),
            }
        }
        let part = evaluate_images(&dataset, &images, &opts);
        run.records.extend(part.records);
        run.failures.extend(part.failures);
    }
    sort_records(&mut run.records);
    Ok(run)
}

/// Unweighted means per (dataset, quality, variant, convention), sorted.
pub fn mean_rows(records: &[EvaluationRecord]) -> Vec<EvaluationRecord> {
    let mut groups: BTreeMap<(String, u8, String, String), Vec<&EvaluationRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.image != MEAN_ID) {
        let (d, q, v, c, _) = r.key();
        groups.entry((d, q, v, c)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((dataset, quality, variant, convention), rows)| {
            let n = rows.len() as f64;
            let mean = |f: fn(&EvaluationRecord) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
            EvaluationRecord {
                dataset,
                image: MEAN_ID.into(),
                quality,
                variant,
                convention,
                psnr: mean(|r| r.psnr),
                psnr_b: mean(|r| r.psnr_b),
                ssim: mean(|r| r.ssim),
                jpeg_bytes: (rows.iter().map(|r| r.jpeg_bytes).sum::<usize>() as f64 / n).round() as usize,
            }
        })
        .collect()
}

/// Writes per-image rows, then mean rows, then failures as comment lines.
pub fn write_records_csv(path: &Path, run: &EvaluationRun) -> Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "{EVAL_SCHEMA}")?;
    {
        let mut w = csv::Writer::from_writer(&mut file);
        for r in run.records.iter().chain(mean_rows(&run.records).iter()) {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    for f in &run.failures {
        writeln!(file, "# failed {}/{}: {}", f.dataset, f.image, f.message.replace('\n', " "))?;
    }
    Ok(())
}

/// Reads a CSV written by [`write_records_csv`]; mean rows are dropped.
pub fn read_records_csv(path: &Path) -> Result<Vec<EvaluationRecord>> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    if first.starts_with('#') && first != EVAL_SCHEMA {
        return Err(Error::Config(format!("unsupported evaluation schema '{first}', expected '{EVAL_SCHEMA}'")));
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    for col in ["dataset", "image", "quality", "variant", "convention", "psnr", "psnr_b", "ssim", "jpeg_bytes"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Config(format!("evaluation CSV is missing column '{col}'")));
        }
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<EvaluationRecord>().enumerate() {
        let row = row.map_err(|e| {
            let col = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err
                    .field()
                    .and_then(|f| headers.get(f as usize))
                    .map(|h| format!(" in column '{h}'"))
                    .unwrap_or_default(),
                _ => String::new(),
            };
            Error::Config(format!("evaluation CSV row {}{col}: {e}", i + 1))
        })?;
        if row.image != MEAN_ID {
            out.push(row);
        }
    }
    Ok(out)
}

/// Mean PSNR(restored) − mean PSNR(jpeg) per quality, for one convention.
pub fn improvement_curve(records: &[EvaluationRecord], convention: MetricsConvention) -> Vec<(u8, f64)> {
    let c = convention.to_string();
    let means = mean_rows(records);
    let mut by_q: BTreeMap<u8, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for m in means.iter().filter(|m| m.convention == c) {
        let e = by_q.entry(m.quality).or_default();
        match m.variant.as_str() {
            "jpeg" => e.0 = Some(m.psnr),
            "restored" => e.1 = Some(m.psnr),
            _ => {}
        }
    }
    by_q.into_iter().filter_map(|(q, (j, r))| Some((q, r? - j?))).collect()
}

pub fn write_curve_csv(path: &Path, curve: &[(u8, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["quality", "delta_psnr"])?;
    for (q, d) in curve {
        w.write_record([q.to_string(), format!("{d:.6}")])?;
    }
    w.flush()?;
    Ok(())
}
