#![allow(dead_code)]

pub mod coeff_images;
pub mod model_grad;
pub mod op_suite;

use std::path::{Path, PathBuf};

use qgac::harness::io::{list_images, read_image};
use qgac::jpeg::{Image, QuantizedImage};

pub fn testdata() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata")
}

pub fn photos() -> Vec<(String, Image)> {
    list_images(&testdata().join("photos"))
        .unwrap()
        .into_iter()
        .map(|p| (qgac::harness::io::image_id(&p), read_image(&p).unwrap()))
        .collect()
}

/// Compares our quantized planes with libjpeg's coefficient arrays.
pub fn same_as_reference(ours: &QuantizedImage, reference: &jpeg_reference::RefCoefficients) -> Result<(), String> {
    let planes = ours.components();
    if planes.len() != reference.components.len() {
        return Err(format!("{} vs {} components", planes.len(), reference.components.len()));
    }
    for (ci, (p, r)) in planes.iter().zip(&reference.components).enumerate() {
        if (p.block_cols, p.block_rows) != (r.blocks_w, r.blocks_h) {
            return Err(format!(
                "component {ci}: grid {}x{} vs {}x{}",
                p.block_cols, p.block_rows, r.blocks_w, r.blocks_h
            ));
        }
        let q: Vec<u16> = p.quant.entries().to_vec();
        if q != r.quant.to_vec() {
            return Err(format!("component {ci}: quantization tables differ"));
        }
        for (bi, block) in p.blocks.iter().enumerate() {
            let refb = &r.coefficients[bi * 64..bi * 64 + 64];
            for k in 0..64 {
                if block.0[k] != refb[k] as i32 {
                    return Err(format!("component {ci} block {bi} coeff {k}: {} vs {}", block.0[k], refb[k]));
                }
            }
        }
    }
    Ok(())
}

pub fn max_abs_diff(a: &[u8], b: &[u8]) -> u8 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y)).max().unwrap_or(0)
}
