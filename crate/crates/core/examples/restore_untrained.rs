//! A freshly initialized network starts as the identity: restoring a JPEG
//! reproduces the plain decoder output.

use std::path::Path;

use qgac::coeff::NormalizationStats;
use qgac::harness::read_image;
use qgac::jpeg::{decode_jpeg_pixels, encode_jpeg, EncodeOptions, Subsampling};
use qgac::model::{restore_image, ModelCheckpoint, NetworkConfig};

fn main() -> qgac::error::Result<()> {
    let img = read_image(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/photos/04_chelsea0.png"))?;
    let img = img.crop_at(0, 0, 96, 80)?;
    let ckpt = ModelCheckpoint::initialize(NetworkConfig::toy(), NormalizationStats::identity(), 42)?;
    for q in [10, 50, 100] {
        let jpeg = encode_jpeg(&img, &EncodeOptions::new(q, Subsampling::S420))?;
        let restored = restore_image(&jpeg, &ckpt)?;
        let decoded = decode_jpeg_pixels(&jpeg)?;
        let diff = restored
            .to_interleaved()
            .iter()
            .zip(decoded.to_interleaved())
            .map(|(a, b)| a.abs_diff(b))
            .max()
            .unwrap_or(0);
        println!("q{q:<3} max |restored - decoded| = {diff}");
    }
    Ok(())
}
