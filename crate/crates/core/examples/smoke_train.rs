//! Two-stage training of the toy network on 8 small q10 patches.
//!
//!     cargo run --example smoke_train -- [steps] [patch_size]

use std::path::Path;

use qgac::harness::{extract_patches, list_images, load_patch_pairs, smoke_train, PatchSpec, TrainConfig};

fn main() -> qgac::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map(|s| s.parse().expect("steps")).unwrap_or(200);
    let size: usize = args.next().map(|s| s.parse().expect("patch size")).unwrap_or(32);
    let photos = list_images(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/photos"))?;
    let dir = std::env::temp_dir().join("qgac-smoke-train");
    let spec = PatchSpec {
        patch_size: size,
        patches_per_image: 1,
        qualities: vec![10],
        ..PatchSpec::default()
    };
    extract_patches(&photos[..8], &dir, &spec)?;
    let pairs = load_patch_pairs(&dir, 10)?;
    let started = std::time::Instant::now();
    let out = smoke_train(&pairs, &TrainConfig::smoke(steps, 7))?;
    println!("trained {} patches of {size}² for {steps}+{steps} steps in {:.1?}", pairs.len(), started.elapsed());
    let drop = |a: f64, b: f64| 100.0 * (a - b) / a;
    println!("luma   {:.5} -> {:.5} ({:.1}% lower)", out.y_initial, out.y_final, drop(out.y_initial, out.y_final));
    if let (Some(a), Some(b)) = (out.color_initial, out.color_final) {
        println!("chroma {a:.5} -> {b:.5} ({:.1}% lower)", drop(a, b));
    }
    out.write_log_csv(&dir.join("loss.csv"))?;
    println!("loss curve in {}", dir.join("loss.csv").display());
    Ok(())
}
