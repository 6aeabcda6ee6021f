//! Cut a reproducible patch corpus with one JPEG per quality.

use std::path::Path;

use qgac::harness::{extract_patches, list_images, PatchSpec};

fn main() -> qgac::error::Result<()> {
    let photos = list_images(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/photos"))?;
    let out = std::env::temp_dir().join("qgac-patches-example");
    let spec = PatchSpec {
        patch_size: 64,
        patches_per_image: 3,
        qualities: vec![10, 30, 50],
        ..PatchSpec::default()
    };
    let m = extract_patches(&photos, &out, &spec)?;
    println!(
        "{} images -> {} originals, {} jpegs (expected {}), {} skipped; manifest at {}",
        photos.len(),
        m.count("original"),
        m.count("jpeg"),
        spec.jpeg_count(photos.len() - m.count("skipped")),
        m.count("skipped"),
        out.join("manifest.csv").display()
    );
    println!("at full scale: {} jpegs from 3550 images", PatchSpec::default().jpeg_count(3550));
    Ok(())
}
