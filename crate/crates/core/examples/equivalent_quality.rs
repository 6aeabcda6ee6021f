//! Which JPEG quality matches a restoration's SSIM, and how many bytes it
//! would cost. Here "restoration" is simply a better JPEG.

use std::path::Path;

use qgac::harness::{equivalent_quality, read_image};
use qgac::jpeg::{decode_jpeg_pixels, encode_jpeg, EncodeOptions, Subsampling};

fn main() -> qgac::error::Result<()> {
    let img = read_image(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/photos/02_coffee0.png"))?;
    for better in [10, 25, 60] {
        let stand_in = decode_jpeg_pixels(&encode_jpeg(&img, &EncodeOptions::new(better, Subsampling::S420))?)?;
        let r = equivalent_quality(&img, &stand_in, 10, Subsampling::S420)?;
        println!(
            "restoration like q{better:<3} SSIM {:.4}: equivalent quality {:?}, extra bytes {:?}",
            r.target_ssim, r.quality, r.bytes_saved
        );
    }
    let perfect = equivalent_quality(&img, &img, 10, Subsampling::S420)?;
    println!("perfect restoration: {:?}", perfect.quality.map_or("none".to_string(), |q| q.to_string()));
    Ok(())
}
