mod common;

use std::collections::BTreeMap;

use common::photos;
use qgac::coeff::NormalizationStats;
use qgac::harness::*;
use qgac::jpeg::{decode_jpeg_coefficients, decode_jpeg_pixels, encode_jpeg, EncodeOptions, Image, Subsampling};
use qgac::metrics::{ssim, MetricsConvention};
use qgac::model::{is_luma_param, ModelCheckpoint, NetworkConfig};

fn small_spec(size: usize, per_image: usize, qualities: Vec<u8>) -> PatchSpec {
    PatchSpec {
        patch_size: size,
        patches_per_image: per_image,
        qualities,
        seed: 11,
        subsampling: Subsampling::S420,
    }
}

fn photo_paths() -> Vec<std::path::PathBuf> {
    list_images(&common::testdata().join("photos")).unwrap()
}

#[test]
fn patch_counts_follow_the_product_rule() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(32, 30, (1..=10).map(|q| q * 10).collect());
    let m = extract_patches(&photo_paths()[..2], dir.path(), &spec).unwrap();
    assert_eq!(m.count("jpeg"), 600);
    assert_eq!(m.count("original"), 60);
    assert_eq!(m.count("jpeg"), spec.jpeg_count(2));
    assert_eq!(std::fs::read_dir(dir.path().join("q010")).unwrap().count(), 60);
    let back = PatchManifest::read(&dir.path().join("manifest.csv")).unwrap();
    assert_eq!(back, m);
    // the full-size corpus arithmetic
    assert_eq!(PatchSpec::default().jpeg_count(3550), 1_065_000);
}

#[test]
fn crops_are_reproducible_and_in_bounds() {
    let spec = small_spec(64, 30, vec![10]);
    let a = crop_coordinates(200, 150, &spec, 3);
    assert_eq!(a, crop_coordinates(200, 150, &spec, 3));
    assert_ne!(a, crop_coordinates(200, 150, &spec, 4));
    assert!(a.iter().all(|&(x, y)| x + 64 <= 200 && y + 64 <= 150));
    let other = PatchSpec { seed: 12, ..spec.clone() };
    assert_ne!(a, crop_coordinates(200, 150, &other, 3));

    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let imgs = &photo_paths()[..3];
    let spec = small_spec(32, 4, vec![10, 90]);
    extract_patches(imgs, d1.path(), &spec).unwrap();
    rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| extract_patches(imgs, d2.path(), &spec).unwrap());
    for sub in ["manifest.csv", "q010/00_astronaut0_p002.jpg", "originals/01_astronaut1_p003.png"] {
        assert_eq!(std::fs::read(d1.path().join(sub)).unwrap(), std::fs::read(d2.path().join(sub)).unwrap(), "{sub}");
    }
}

#[test]
fn small_images_are_skipped_and_logged() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(256, 30, vec![10, 50]);
    let m = extract_patches(&photo_paths()[..3], dir.path(), &spec).unwrap();
    assert_eq!(m.count("skipped"), 3);
    assert_eq!(m.count("jpeg"), spec.jpeg_count(3) - 3 * 30 * 2);
    assert!(m.entries.iter().all(|e| e.note.contains("smaller than patch size 256")));
    assert!(PatchSpec { patch_size: 40, ..spec }.validate().is_err());
}

#[test]
fn pairs_load_in_manifest_order() {
    let dir = tempfile::tempdir().unwrap();
    extract_patches(&photo_paths()[..2], dir.path(), &small_spec(16, 2, vec![10, 50])).unwrap();
    let pairs = load_patch_pairs(dir.path(), 50).unwrap();
    let names: Vec<_> = pairs.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["00_astronaut0_p000", "00_astronaut0_p001", "01_astronaut1_p000", "01_astronaut1_p001"]);
    for p in &pairs {
        assert_eq!((p.original.width(), p.original.height()), (16, 16));
        assert_eq!(p.jpeg, encode_jpeg(&p.original, &EncodeOptions::new(50, Subsampling::S420)).unwrap());
    }
}

fn subset(n: usize) -> Vec<(String, Image)> {
    photos().into_iter().take(n).collect()
}

#[test]
fn evaluation_is_identical_across_thread_counts() {
    let imgs = subset(4);
    let conventions = [MetricsConvention::Standard, MetricsConvention::Luma];
    let opts = EvalOptions {
        qualities: &[10, 50],
        conventions: &conventions,
        subsampling: Subsampling::S420,
        checkpoint: None,
    };
    let csv = |threads| {
        let run = with_threads(Some(threads), || evaluate_images("photos", &imgs, &opts)).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_records_csv(f.path(), &run).unwrap();
        std::fs::read(f.path()).unwrap()
    };
    let one = csv(1);
    assert_eq!(one, csv(4));
    let text = String::from_utf8(one).unwrap();
    assert!(text.starts_with(EVAL_SCHEMA));
    // 4 images x 2 qualities x 2 conventions, plus 4 mean rows
    assert_eq!(text.lines().count(), 1 + 1 + 16 + 4);
}

fn identity_checkpoint() -> ModelCheckpoint {
    ModelCheckpoint::initialize(NetworkConfig::toy(), NormalizationStats::identity(), 5).unwrap()
}

#[test]
fn untrained_checkpoint_changes_nothing() {
    let imgs = subset(2);
    let ckpt = identity_checkpoint();
    let conventions = [MetricsConvention::Standard];
    let qualities: Vec<u8> = vec![10, 30, 50];
    let opts = EvalOptions {
        qualities: &qualities,
        conventions: &conventions,
        subsampling: Subsampling::S420,
        checkpoint: Some(&ckpt),
    };
    let run = evaluate_images("photos", &imgs, &opts);
    assert!(run.failures.is_empty());
    let curve = improvement_curve(&run.records, MetricsConvention::Standard);
    assert_eq!(curve.iter().map(|c| c.0).collect::<Vec<_>>(), qualities);
    for (q, d) in &curve {
        assert!(d.abs() < 0.02, "q{q}: {d}");
    }
    let f = tempfile::NamedTempFile::new().unwrap();
    write_curve_csv(f.path(), &curve).unwrap();
    assert_eq!(std::fs::read_to_string(f.path()).unwrap().lines().count(), 1 + qualities.len());
}

#[test]
fn failures_become_comment_lines_and_are_skipped_on_read() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(photo_paths()[0].clone(), dir.path().join("ok.png")).unwrap();
    std::fs::write(dir.path().join("broken.png"), b"not a png").unwrap();
    let config = RunConfig {
        input_dirs: vec![dir.path().to_path_buf()],
        qualities: vec![20],
        ..RunConfig::default()
    };
    let run = evaluate_dataset(&config).unwrap();
    assert_eq!(run.failures.len(), 1);
    assert_eq!(run.failures[0].image, "broken");
    let out = dir.path().join("eval.csv");
    write_records_csv(&out, &run).unwrap();
    assert!(std::fs::read_to_string(&out).unwrap().contains("# failed"));
    let back = read_records_csv(&out).unwrap();
    assert_eq!(back.len(), run.records.len());
    for (a, b) in back.iter().zip(&run.records) {
        assert_eq!((&a.image, a.quality, a.jpeg_bytes), (&b.image, b.quality, b.jpeg_bytes));
        assert!((a.psnr - b.psnr).abs() < 1e-12);
    }
}

#[test]
fn schema_errors_name_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, format!("{EVAL_SCHEMA}\ndataset,image,quality,variant,convention,psnr,ssim,jpeg_bytes\n")).unwrap();
    let e = read_records_csv(&p).unwrap_err().to_string();
    assert!(e.contains("psnr_b"), "{e}");
    std::fs::write(
        &p,
        format!("{EVAL_SCHEMA}\ndataset,image,quality,variant,convention,psnr,psnr_b,ssim,jpeg_bytes\nd,a,10,jpeg,standard,x,1,1,5\n"),
    )
    .unwrap();
    let e = read_records_csv(&p).unwrap_err().to_string();
    assert!(e.contains("'psnr'"), "{e}");
    std::fs::write(&p, "# qgac-eval v9\n").unwrap();
    assert!(read_records_csv(&p).unwrap_err().to_string().contains("v9"));
}

fn record(dataset: &str, image: &str, q: u8, variant: &str, psnr: f64) -> EvaluationRecord {
    EvaluationRecord {
        dataset: dataset.into(),
        image: image.into(),
        quality: q,
        variant: variant.into(),
        convention: "standard".into(),
        psnr,
        psnr_b: psnr - 1.0,
        ssim: psnr / 100.0,
        jpeg_bytes: 100,
    }
}

#[test]
fn one_row_in_one_row_out() {
    let s = summarize(&[record("live", "a", 10, "jpeg", 25.0)]);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].rows.len(), 1);
    assert_eq!(s[0].rows[0].images, 1);
    assert_eq!(s[0].rows[0].psnr, 25.0);
}

#[test]
fn report_means_match_an_independent_recomputation() {
    let mut records = Vec::new();
    let mut k = 0.0;
    for d in ["a", "b"] {
        for q in [10, 50] {
            for i in 0..7 {
                k += 1.37;
                records.push(record(d, &format!("img{i}"), q, "jpeg", 20.0 + (k * 7.1f64).sin() * 5.0));
            }
        }
    }
    let mut sums: BTreeMap<(String, u8), (f64, f64, f64, usize)> = BTreeMap::new();
    for r in &records {
        let e = sums.entry((r.dataset.clone(), r.quality)).or_default();
        e.0 += r.psnr;
        e.1 += r.psnr_b;
        e.2 += r.ssim;
        e.3 += 1;
    }
    let sections = summarize(&records);
    assert_eq!(sections.len(), 2);
    for s in &sections {
        for row in &s.rows {
            let (p, pb, ss, n) = sums[&(s.dataset.clone(), row.quality)];
            let n_f = n as f64;
            assert_eq!(row.images, n);
            assert!((row.psnr - p / n_f).abs() < 1e-9);
            assert!((row.psnr_b - pb / n_f).abs() < 1e-9);
            assert!((row.ssim - ss / n_f).abs() < 1e-9);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let files = write_report(&records, dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    let svg = std::fs::read_to_string(dir.path().join("psnr.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn empty_variant_partition_is_omitted() {
    let records = vec![record("a", "x", 10, "jpeg", 25.0), record("a", "y", 10, "jpeg", 27.0)];
    let sections = summarize(&records);
    assert!(sections.iter().all(|s| s.variant == "jpeg"));
    let md = markdown(&sections);
    assert!(!md.contains("restored"));
    assert!(summarize(&[]).is_empty());
    let dir = tempfile::tempdir().unwrap();
    write_report(&[], dir.path()).unwrap();
}

fn brute_force_eqq(original: &Image, restored: &Image, start: u8) -> (Option<u8>, Option<i64>) {
    let target = ssim(original, restored).unwrap();
    let all: Vec<(u8, f64, usize)> = (start..=100)
        .map(|q| {
            let j = encode_jpeg(original, &EncodeOptions::new(q, Subsampling::S420)).unwrap();
            (q, ssim(original, &decode_jpeg_pixels(&j).unwrap()).unwrap(), j.len())
        })
        .collect();
    let base = all[0].2 as i64;
    let hit = all.iter().filter(|(_, s, _)| *s >= target).min_by_key(|(q, _, _)| *q);
    (hit.map(|h| h.0), hit.map(|h| h.2 as i64 - base))
}

#[test]
fn equivalent_quality_matches_exhaustive_scan() {
    for (id, img) in subset(3) {
        let img = img.crop_at(0, 0, 64, 48).unwrap();
        // a restoration that lands between q20 and q40
        let a = decode_jpeg_pixels(&encode_jpeg(&img, &EncodeOptions::new(30, Subsampling::S420)).unwrap()).unwrap();
        let got = equivalent_quality(&img, &a, 10, Subsampling::S420).unwrap();
        assert_eq!((got.quality, got.bytes_saved), brute_force_eqq(&img, &a, 10), "{id}");
        assert!(got.quality.unwrap() <= 30);
    }
}

#[test]
fn equivalent_quality_identity_and_sentinel() {
    let img = photos()[2].1.crop_at(8, 8, 48, 48).unwrap();
    let j = encode_jpeg(&img, &EncodeOptions::new(40, Subsampling::S420)).unwrap();
    let got = equivalent_quality(&img, &decode_jpeg_pixels(&j).unwrap(), 40, Subsampling::S420).unwrap();
    assert_eq!((got.quality, got.bytes_saved), (Some(40), Some(0)));
    let perfect = equivalent_quality(&img, &img, 90, Subsampling::S420).unwrap();
    assert_eq!((perfect.quality, perfect.bytes_saved), (None, None));
    assert_eq!(perfect.target_ssim, 1.0);
}

#[test]
fn saturation_matches_direct_counting() {
    for (id, img) in subset(3) {
        let j = encode_jpeg(&img, &EncodeOptions::new(10, Subsampling::S420)).unwrap();
        let (coeffs, _) = decode_jpeg_coefficients(&j).unwrap();
        let plane = &coeffs.y;
        let got = frequency_saturation(plane, FrequencyGrouping::AntiDiagonal);
        let mut set = [0usize; 15];
        let mut total = [0usize; 15];
        for row in 0..plane.height() {
            for col in 0..plane.width() {
                let g = row % 8 + col % 8;
                total[g] += 1;
                if plane.get(row, col) != 0.0 {
                    set[g] += 1;
                }
            }
        }
        for g in 0..15 {
            assert!((got[g] - set[g] as f64 / total[g] as f64).abs() < 1e-15, "{id} group {g}");
        }
        assert!(got.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(got[0] > got[14], "{id}: {got:?}");
        let per = frequency_saturation(plane, FrequencyGrouping::PerCoefficient);
        assert_eq!(per.len(), 64);
    }
    assert_eq!(FrequencyGrouping::AntiDiagonal.group_sizes().iter().sum::<usize>(), 64);
    assert_eq!(FrequencyGrouping::PerCoefficient.group_sizes(), vec![1; 64]);
}

fn train_pairs(n: usize, size: usize, q: u8) -> Vec<PatchPair> {
    photos()
        .into_iter()
        .take(n)
        .map(|(id, img)| {
            let original = img.crop_at(16, 16, size, size).unwrap();
            let jpeg = encode_jpeg(&original, &EncodeOptions::new(q, Subsampling::S420)).unwrap();
            PatchPair { name: id, original, jpeg }
        })
        .collect()
}

#[test]
fn training_is_deterministic_and_freezes_luma() {
    let pairs = train_pairs(4, 16, 10);
    let mut cfg = TrainConfig::smoke(6, 3);
    cfg.batch = 2;
    let a = smoke_train(&pairs, &cfg).unwrap();
    let b = smoke_train(&pairs, &cfg).unwrap();
    let bits = |o: &TrainOutcome| o.log.iter().map(|s| s.loss.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.log.len(), 12);
    assert!(a.color_initial.is_some());

    // Luma weights after both stages equal those after the luma stage alone.
    let y_only = smoke_train(&pairs, &TrainConfig { color_steps: 0, ..cfg.clone() }).unwrap();
    assert!(y_only.color_initial.is_none());
    let init = ModelCheckpoint::initialize(cfg.network, NormalizationStats::identity(), cfg.seed).unwrap();
    let (mut luma, mut color_moved) = (0, false);
    for (name, p) in a.checkpoint.params.iter() {
        let y = y_only.checkpoint.params.get(name).unwrap();
        if is_luma_param(name) {
            luma += 1;
            assert!(p.data.iter().zip(&y.data).all(|(u, v)| u.to_bits() == v.to_bits()), "{name}");
        } else {
            assert_eq!(y.data, init.params.get(name).unwrap().data, "{name} moved during the luma stage");
            color_moved |= p.data != y.data;
        }
    }
    assert!(luma > 0 && color_moved);

    let f = tempfile::NamedTempFile::new().unwrap();
    a.write_log_csv(f.path()).unwrap();
    let text = std::fs::read_to_string(f.path()).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.lines().nth(1).unwrap().starts_with("y,0,"));
}

#[test]
fn training_rejects_mixed_patches() {
    let mut pairs = train_pairs(2, 16, 10);
    pairs.extend(train_pairs(1, 16, 50));
    let e = smoke_train(&pairs, &TrainConfig::smoke(2, 0)).unwrap_err();
    assert!(e.to_string().contains("share"), "{e}");
    let mut cfg = TrainConfig::smoke(2, 0);
    cfg.batch = 9;
    assert!(smoke_train(&train_pairs(2, 16, 10), &cfg).is_err());
}

#[test]
fn toml_config_round_trip() {
    let c = RunConfig::from_toml_str(
        "input_dirs = [\"a\", \"b\"]\noutput_dir = \"out\"\nqualities = [10, 20]\nmetrics_conventions = [\"luma\"]\nthreads = 2\n",
    )
    .unwrap();
    assert_eq!(c.qualities, vec![10, 20]);
    assert_eq!(c.conventions, vec![MetricsConvention::Luma]);
    assert_eq!(c.threads, Some(2));
    assert!(RunConfig::from_toml_str("bogus = 1\n").is_err());
}

#[test]
fn trained_checkpoint_improves_its_own_patches() {
    let pairs = train_pairs(8, 32, 10);
    let outcome = smoke_train(&pairs, &TrainConfig::smoke(100, 5)).unwrap();
    let images: Vec<(String, Image)> = pairs.iter().map(|p| (p.name.clone(), p.original.clone())).collect();
    let conventions = [MetricsConvention::Standard];
    let opts = EvalOptions {
        qualities: &[10],
        conventions: &conventions,
        subsampling: Subsampling::S420,
        checkpoint: Some(&outcome.checkpoint),
    };
    let curve = improvement_curve(&evaluate_images("patches", &images, &opts).records, MetricsConvention::Standard);
    assert_eq!(curve.len(), 1);
    assert!(curve[0].1 > 0.0, "{curve:?}");
}
