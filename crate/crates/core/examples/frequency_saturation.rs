//! Fraction of nonzero coefficients per anti-diagonal frequency band.

use std::path::Path;

use qgac::harness::{frequency_saturation, read_image, FrequencyGrouping};
use qgac::jpeg::{decode_jpeg_coefficients, encode_jpeg, EncodeOptions, Subsampling};

fn main() -> qgac::error::Result<()> {
    let img = read_image(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/photos/15_gravel0.png"))?;
    for q in [10, 50, 90] {
        let (coeffs, _) = decode_jpeg_coefficients(&encode_jpeg(&img, &EncodeOptions::new(q, Subsampling::S420))?)?;
        let p = frequency_saturation(&coeffs.y, FrequencyGrouping::AntiDiagonal);
        println!("q{q:<3} {}", p.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
