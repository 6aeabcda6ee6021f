//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 2 needs the Live-1 images (29 lossless originals). Point
//! `QGAC_LIVE1_DIR` at them, or place them in `testdata/live1`. Without them
//! the criterion is reported as FAIL (data unavailable) and does not change
//! the exit status; every other failure does.
//!
//! `QGAC_ACCEPTANCE_ONLY=3,8` runs a subset.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::coeff_images::corpus_case;
use common::{max_abs_diff, photos, same_as_reference};
use jpeg_reference as reference;
use qgac::coeff::NormalizationStats;
use qgac::harness::{
    equivalent_quality, evaluate_images, frequency_saturation, list_images, mean_rows, read_image, smoke_train, EvalOptions,
    FrequencyGrouping, PatchPair, TrainConfig,
};
use qgac::jpeg::quant::quantize_value;
use qgac::jpeg::*;
use qgac::losses::{gan_total_loss, l_jpeg, mean_l1, ragan_generator_loss, texture_loss, LossWeights, RandomConvExtractor};
use qgac::metrics::{ssim, MetricsConvention};
use qgac::model::{interpolate_params, restore_image, ModelCheckpoint, NetworkConfig};
use qgac::nn::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Required data is not present.
    Unavailable(String),
}

use Outcome::*;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn codec_interop() -> Outcome {
    let mut coeff_mismatch = Vec::new();
    let (mut worst_component, mut worst_rgb, mut files) = (0u8, 0u8, 0);
    for (id, img) in photos() {
        for q in [10, 20, 50, 90, 100] {
            let planes = encode_to_coefficients(&img, &EncodeOptions::new(q, Subsampling::S420)).unwrap();
            let bytes = write_jpeg(&planes).unwrap();
            files += 1;
            let theirs = reference::read_coefficients(&bytes).unwrap();
            let ours = parse_jpeg(&bytes).unwrap().image;
            if let Err(e) = same_as_reference(&ours, &theirs) {
                coeff_mismatch.push(format!("{id} q{q}: {e}"));
            }
            let (coeffs, _) = decode_jpeg_coefficients(&bytes).unwrap();
            let ycc = coefficient_image_to_ycbcr(&coeffs).unwrap();
            let ref_ycc = reference::decode_ycc(&bytes, false, false).unwrap();
            worst_component = worst_component.max(max_abs_diff(&ycc.to_interleaved(), &ref_ycc.data));
            let ref_rgb = reference::decode_pixels(&bytes, false, false).unwrap();
            worst_rgb = worst_rgb.max(max_abs_diff(&decode_jpeg_pixels(&bytes).unwrap().to_interleaved(), &ref_rgb.data));
        }
    }
    verdict(
        coeff_mismatch.is_empty() && worst_component <= 1,
        format!(
            "{files} files, coefficient mismatches {}, max sample diff {worst_component} (after RGB conversion {worst_rgb}){}",
            coeff_mismatch.len(),
            coeff_mismatch.first().map(|m| format!("; first: {m}")).unwrap_or_default()
        ),
    )
}

fn live1_dir() -> Option<PathBuf> {
    std::env::var_os("QGAC_LIVE1_DIR")
        .map(PathBuf::from)
        .or_else(|| Some(common::testdata().join("live1")))
        .filter(|p| p.is_dir())
}

fn table3_baseline() -> Outcome {
    let Some(dir) = live1_dir() else {
        return Unavailable("Live-1 originals not found (set QGAC_LIVE1_DIR)".into());
    };
    let images: Vec<(String, Image)> = list_images(&dir)
        .unwrap()
        .iter()
        .map(|p| (qgac::harness::image_id(p), read_image(p).unwrap()))
        .collect();
    // (quality, PSNR, PSNR-B, SSIM)
    let targets = [(10u8, 25.60, 23.53, 0.755), (20, 27.96, 25.77, 0.837), (50, 30.91, 28.94, 0.905)];
    let opts = EvalOptions {
        qualities: &[10, 20, 50],
        conventions: &MetricsConvention::ALL,
        subsampling: Subsampling::S420,
        checkpoint: None,
    };
    let run = evaluate_images("live1", &images, &opts);
    if !run.failures.is_empty() {
        return Fail(format!("{} images failed to evaluate", run.failures.len()));
    }
    let means = mean_rows(&run.records);
    let mut report = Vec::new();
    let mut matching = Vec::new();
    for c in MetricsConvention::ALL {
        let mut ok = true;
        let mut cells = Vec::new();
        for (q, p, pb, s) in targets {
            let m = means.iter().find(|m| m.quality == q && m.convention == c.to_string()).unwrap();
            ok &= (m.psnr - p).abs() <= 0.1 && (m.psnr_b - pb).abs() <= 0.2 && (m.ssim - s).abs() <= 0.005;
            cells.push(format!("q{q} {:.2}/{:.2}/{:.3}", m.psnr, m.psnr_b, m.ssim));
        }
        if ok {
            matching.push(c.to_string());
        }
        report.push(format!("{c}: {}", cells.join(", ")));
    }
    verdict(
        !matching.is_empty(),
        format!("{} images; matching conventions {matching:?}; {}", images.len(), report.join("; ")),
    )
}

fn dct_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut trip, mut parseval) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let x: [f64; 64] = std::array::from_fn(|_| rng.gen_range(-128.0..128.0));
        let d = dct_forward_block(&x);
        let back = dct_inverse_block(&d);
        trip = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(trip, f64::max);
        let e1: f64 = x.iter().map(|v| v * v).sum();
        let e2: f64 = d.iter().map(|v| v * v).sum();
        parseval = parseval.max((e1 - e2).abs() / e1);
    }
    verdict(
        trip < 1e-9 && parseval < 1e-9,
        format!("10000 blocks, max round-trip error {trip:.1e}, max relative energy error {parseval:.1e}"),
    )
}

/// Truncation toward zero by counting whole divisors.
fn truncate_by_counting(d: f64, divisor: u16) -> i32 {
    let mut m = 0i32;
    while (m + 1) as f64 * divisor as f64 <= d.abs() {
        m += 1;
    }
    if d < 0.0 {
        -m
    } else {
        m
    }
}

fn quantization_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut bound_violations, mut oracle_mismatches, mut worst) = (0, 0, 0.0f64);
    let mut checked = 0;
    while checked < 1_000_000 {
        let divisor: u16 = rng.gen_range(1..=255);
        let d: f64 = rng.gen_range(-2048.0..2048.0);
        let ratio = d / divisor as f64;
        // values within float noise of a multiple snap to it; keep the oracle unambiguous
        if (ratio - ratio.round()).abs() < 1e-6 {
            continue;
        }
        checked += 1;
        let k = quantize_value(d, divisor, QuantRounding::Truncate);
        let err = (k as f64 * divisor as f64 - d).abs();
        worst = worst.max(err / divisor as f64);
        bound_violations += usize::from(err >= divisor as f64);
        oracle_mismatches += usize::from(k != truncate_by_counting(d, divisor));
    }
    // exact multiples come back exactly
    for divisor in 1..=255u16 {
        for k in -40..=40i32 {
            oracle_mismatches += usize::from(quantize_value(k as f64 * divisor as f64, divisor, QuantRounding::Truncate) != k);
        }
    }
    verdict(
        bound_violations == 0 && oracle_mismatches == 0,
        format!(
            "{checked} pairs, bound violations {bound_violations}, oracle mismatches {oracle_mismatches}, max error/divisor {worst:.6}"
        ),
    )
}

fn entropy_round_trip() -> Outcome {
    let tables = HuffmanSet::standard();
    let mut failures = Vec::new();
    for i in 0..1000 {
        let img = corpus_case(i);
        let dims = ScanDims {
            width: img.width,
            height: img.height,
            subsampling: img.subsampling,
            gray: img.is_gray(),
        };
        let chroma = img.cb.as_ref().map_or(img.y.quant, |c| c.quant);
        let scan = entropy_encode_scan(&img, &tables).and_then(|b| entropy_decode_scan(&b, &tables, dims, (img.y.quant, chroma)));
        let file = write_jpeg(&img).and_then(|f| parse_jpeg(&f)).map(|p| p.image);
        if scan.ok().as_ref() != Some(&img) || file.ok().as_ref() != Some(&img) {
            failures.push(i);
        }
    }
    verdict(
        failures.is_empty(),
        format!("1000 images (all-zero, extreme, single-block, sparse, dense), failures {failures:?}"),
    )
}

fn gradient_suite() -> Outcome {
    let mut worst_op = (String::new(), 0.0f64);
    let cases = common::op_suite::cases();
    for case in &cases {
        let e = common::op_suite::check_case(case, 20);
        if e >= worst_op.1 {
            worst_op = (case.name.to_string(), e);
        }
    }
    let subnets = common::model_grad::subnetwork_gradcheck(7, 12);
    let (worst_sub, worst_sub_err) = subnets
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k.clone(), *v))
        .unwrap();
    verdict(
        worst_op.1 < 1e-4 && worst_sub_err < 1e-3,
        format!(
            "{} ops, worst {} {:.1e}; {} subnetworks end to end, worst {worst_sub} {worst_sub_err:.1e}",
            cases.len(),
            worst_op.0,
            worst_op.1,
            subnets.len()
        ),
    )
}

fn identity_at_init() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut stats = NormalizationStats::identity();
    for k in 0..64 {
        stats.luma.mean[k] = rng.gen_range(-5.0..5.0);
        stats.luma.std[k] = rng.gen_range(1.0..50.0);
        stats.chroma.mean[k] = rng.gen_range(-5.0..5.0);
        stats.chroma.std[k] = rng.gen_range(1.0..50.0);
    }
    let ckpt = ModelCheckpoint::initialize(NetworkConfig::default(), stats, 5).unwrap();
    let mut worst = 0u8;
    for (_, img) in photos().iter().step_by(4).take(5) {
        for q in [10, 50, 100] {
            let jpeg = encode_jpeg(img, &EncodeOptions::new(q, Subsampling::S420)).unwrap();
            let restored = restore_image(&jpeg, &ckpt).unwrap();
            worst = worst.max(max_abs_diff(&restored.to_interleaved(), &decode_jpeg_pixels(&jpeg).unwrap().to_interleaved()));
        }
    }
    verdict(worst <= 1, format!("default-width network, 5 images x q{{10,50,100}}, max diff {worst}"))
}

fn smoke_patches() -> Vec<PatchPair> {
    photos()
        .into_iter()
        .take(8)
        .map(|(id, img)| {
            let original = img.crop_at(40, 40, 32, 32).unwrap();
            let jpeg = encode_jpeg(&original, &EncodeOptions::new(10, Subsampling::S420)).unwrap();
            PatchPair { name: id, original, jpeg }
        })
        .collect()
}

fn smoke_training(trained: &mut Option<ModelCheckpoint>) -> Outcome {
    let pairs = smoke_patches();
    let cfg = TrainConfig::smoke(200, 1);
    let a = match smoke_train(&pairs, &cfg) {
        Ok(a) => a,
        Err(e) => return Fail(e.to_string()),
    };
    let b = smoke_train(&pairs, &cfg).unwrap();
    let identical = a.log.len() == b.log.len() && a.log.iter().zip(&b.log).all(|(x, y)| x.loss.to_bits() == y.loss.to_bits());
    let y_ratio = a.y_final / a.y_initial;
    let c_ratio = a.color_final.unwrap() / a.color_initial.unwrap();
    let out = verdict(
        identical && y_ratio <= 0.8 && c_ratio <= 0.8,
        format!(
            "8 patches 32x32 q10, 200+200 steps: luma loss {:.4} -> {:.4} (x{y_ratio:.3}), chroma {:.4} -> {:.4} (x{c_ratio:.3}); repeat run bit-identical: {identical}",
            a.y_initial,
            a.y_final,
            a.color_initial.unwrap(),
            a.color_final.unwrap()
        ),
    );
    *trained = Some(a.checkpoint);
    out
}

fn loss_constants() -> Outcome {
    let x = Tensor::new([2, 1, 16, 16], (0..512).map(|i| ((i as f64) * 0.37).sin() * 0.5 + 0.5).collect()).unwrap();
    let y = Tensor::new([2, 1, 16, 16], (0..512).map(|i| ((i as f64) * 0.41).cos() * 0.5 + 0.5).collect()).unwrap();
    let self_loss = l_jpeg(&x, &x, 0.05).unwrap().item().unwrap();

    let w = LossWeights::default();
    let f = RandomConvExtractor::new(1, &[4, 4], 2).unwrap();
    let d_real = Tensor::new([2, 1, 1, 1], vec![0.7, -0.2]).unwrap();
    let d_fake = Tensor::new([2, 1, 1, 1], vec![0.1, 0.4]).unwrap();
    let total = gan_total_loss(&x, &y, &d_real, &d_fake, &f, &w).unwrap().item().unwrap();
    let by_hand = texture_loss(&x, &y, &f).unwrap().item().unwrap()
        + 5e-3 * ragan_generator_loss(&d_real, &d_fake).unwrap().item().unwrap()
        + 1e-2 * mean_l1(&x, &y).unwrap().item().unwrap();

    let stats = NormalizationStats::identity();
    let a = ModelCheckpoint::initialize(NetworkConfig::toy(), stats.clone(), 1).unwrap();
    let b = ModelCheckpoint::initialize(NetworkConfig::toy(), stats, 2).unwrap();
    let at0 = interpolate_params(&a, &b, 0.0).unwrap().to_bytes() == a.to_bytes();
    let at1 = interpolate_params(&a, &b, 1.0).unwrap().to_bytes() == b.to_bytes();
    verdict(
        self_loss == -0.05 && (w.gamma, w.nu) == (5e-3, 1e-2) && (total - by_hand).abs() < 1e-12 && at0 && at1,
        format!(
            "l_jpeg(x,x)={self_loss}, weights gamma={} nu={}, GAN total {total:.12} vs parts {by_hand:.12}, interpolation endpoints exact: {at0}/{at1}",
            w.gamma, w.nu
        ),
    )
}

fn analyses(trained: Option<&ModelCheckpoint>) -> Outcome {
    let fallback;
    let ckpt = match trained {
        Some(c) => c,
        None => {
            fallback = ModelCheckpoint::initialize(NetworkConfig::toy(), NormalizationStats::identity(), 3).unwrap();
            &fallback
        }
    };
    let (mut eqq_mismatch, mut freq_mismatch, mut scans, mut summary) = (0, 0, 0, Vec::new());
    for (i, (id, img)) in photos().into_iter().take(10).enumerate() {
        let start = 10;
        let jpeg = encode_jpeg(&img, &EncodeOptions::new(start, Subsampling::S420)).unwrap();
        // the network's restoration, plus a stronger stand-in so the scan has to travel
        let stand_in = decode_jpeg_pixels(&encode_jpeg(&img, &EncodeOptions::new(15 + 7 * i as u8, Subsampling::S420)).unwrap()).unwrap();
        for restored in [restore_image(&jpeg, ckpt).unwrap(), stand_in] {
            let got = equivalent_quality(&img, &restored, start, Subsampling::S420).unwrap();
            let target = ssim(&img, &restored).unwrap();
            let all: Vec<(u8, f64, i64)> = (start..=100)
                .map(|q| {
                    let j = encode_jpeg(&img, &EncodeOptions::new(q, Subsampling::S420)).unwrap();
                    (q, ssim(&img, &decode_jpeg_pixels(&j).unwrap()).unwrap(), j.len() as i64)
                })
                .collect();
            let oracle = all
                .iter()
                .filter(|(_, s, _)| *s >= target)
                .min_by_key(|(q, _, _)| *q)
                .map_or((None, None), |(q, _, n)| (Some(*q), Some(n - all[0].2)));
            eqq_mismatch += usize::from((got.quality, got.bytes_saved) != oracle);
            scans += 1;
            summary.push(format!("{id}:{}", got.quality.map_or("none".into(), |q| q.to_string())));
        }

        let (coeffs, _) = decode_jpeg_coefficients(&jpeg).unwrap();
        for plane in coeffs.components() {
            let p = frequency_saturation(plane, FrequencyGrouping::AntiDiagonal);
            let (mut set, mut all) = ([0usize; 15], [0usize; 15]);
            for r in 0..plane.height() {
                for c in 0..plane.width() {
                    let g = r % 8 + c % 8;
                    all[g] += 1;
                    set[g] += usize::from(plane.get(r, c).abs() > 0.0);
                }
            }
            freq_mismatch += (0..15).filter(|&g| p[g] != set[g] as f64 / all[g] as f64).count();
        }
    }
    verdict(
        eqq_mismatch == 0 && freq_mismatch == 0,
        format!(
            "10 images, {scans} equivalent-quality scans with {eqq_mismatch} oracle mismatches (q*: {}), saturation mismatches {freq_mismatch}",
            summary.join(" ")
        ),
    )
}

fn main() {
    let mut trained = None;
    let criteria: Vec<(u8, &str, Box<dyn FnOnce(&mut Option<ModelCheckpoint>) -> Outcome>)> = vec![
        (1, "codec interop", Box::new(|_| codec_interop())),
        (2, "JPEG baseline metrics on Live-1", Box::new(|_| table3_baseline())),
        (3, "DCT properties", Box::new(|_| dct_properties())),
        (4, "quantization law", Box::new(|_| quantization_law())),
        (5, "entropy round trip", Box::new(|_| entropy_round_trip())),
        (6, "gradient suite", Box::new(|_| gradient_suite())),
        (7, "identity at init", Box::new(|_| identity_at_init())),
        (8, "smoke training", Box::new(smoke_training)),
        (9, "loss constants", Box::new(|_| loss_constants())),
        (10, "equivalent quality and saturation", Box::new(|t| analyses(t.as_ref()))),
    ];
    let only: Option<Vec<u8>> = std::env::var("QGAC_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut hard_failures = 0;
    for (n, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut trained)))
            .unwrap_or_else(|p| Fail(format!("panicked: {}", p.downcast_ref::<String>().cloned().unwrap_or_default())));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Pass(d) => println!("PASS {n:>2} {name} [{secs:.1}s]: {d}"),
            Fail(d) => {
                hard_failures += 1;
                println!("FAIL {n:>2} {name} [{secs:.1}s]: {d}");
            }
            Unavailable(d) => println!("FAIL {n:>2} {name} [{secs:.1}s]: data unavailable, {d}"),
        }
    }
    if hard_failures > 0 {
        eprintln!("{hard_failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
