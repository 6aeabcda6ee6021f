//! Compress a photo at a few qualities and report size and PSNR.
//!
//!     cargo run --example codec_round_trip -- [image]

use std::path::PathBuf;

use qgac::harness::read_image;
use qgac::jpeg::{decode_jpeg_pixels, encode_jpeg, EncodeOptions, QuantRounding, Subsampling};
use qgac::metrics::{psnr, ssim};

fn main() -> qgac::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata/astronaut_256.png"));
    let img = read_image(&path)?;
    println!("{} ({}x{}, {} channels)", path.display(), img.width(), img.height(), img.channels());
    println!("quality  subsampling  rounding  bytes   PSNR     SSIM");
    for q in [10, 50, 90, 100] {
        for sub in [Subsampling::S420, Subsampling::S444] {
            for rounding in [QuantRounding::Truncate, QuantRounding::Nearest] {
                let jpeg = encode_jpeg(&img, &EncodeOptions::new(q, sub).with_rounding(rounding))?;
                let back = decode_jpeg_pixels(&jpeg)?;
                println!(
                    "{q:>7}  {sub:>11}  {:>8}  {:>6}  {:>6.2}  {:.4}",
                    format!("{rounding:?}").to_lowercase(),
                    jpeg.len(),
                    psnr(&img, &back)?,
                    ssim(&img, &back)?
                );
            }
        }
    }
    Ok(())
}
