//! PSNR, PSNR-B and SSIM under each color convention.

use std::path::Path;

use qgac::harness::read_image;
use qgac::jpeg::{decode_jpeg_pixels, encode_jpeg, EncodeOptions, Subsampling};
use qgac::metrics::{evaluate, MetricsConvention};

fn main() -> qgac::error::Result<()> {
    let img = read_image(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/photos/08_motorcycle0.png"))?;
    println!("quality  convention     PSNR    PSNR-B  SSIM");
    for q in [10, 20, 50] {
        let decoded = decode_jpeg_pixels(&encode_jpeg(&img, &EncodeOptions::new(q, Subsampling::S420))?)?;
        for c in MetricsConvention::ALL {
            let m = evaluate(&img, &decoded, c)?;
            println!("{q:>7}  {:<12} {:>6.2}  {:>6.2}  {:.4}", c.to_string(), m.psnr, m.psnr_b, m.ssim);
        }
    }
    Ok(())
}
