//! Coefficient-domain plumbing: per-frequency statistics, normalization,
//! frequency rearrangement and chroma upsampling.

use std::path::Path;

use qgac::coeff::{
    compute_normalization_stats, image_to_coefficients, nn_upsample_coefficient_plane, normalize_plane, pixel_upsample_coefficient_plane,
    rearrange_frequencies,
};
use qgac::harness::read_image;
use qgac::jpeg::{coefficients_to_pixels, ChannelRole, Subsampling};

fn main() -> qgac::error::Result<()> {
    let img = read_image(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/astronaut_256.png"))?;
    let coeffs = image_to_coefficients(&img, Subsampling::S420)?;
    let stats = compute_normalization_stats(std::slice::from_ref(&coeffs.y), ChannelRole::Luma)?;
    println!("luma DC mean {:.1}, std {:.1}; (7,7) std {:.2}", stats.mean[0], stats.std[0], stats.std[63]);

    let normed = normalize_plane(&coeffs.y, &stats)?;
    let r = rearrange_frequencies(&normed)?;
    println!("rearranged into 64 planes of {}x{}", r.rows, r.cols);
    for k in [0, 1, 9, 63] {
        let ch = r.channel(k);
        let m = ch.iter().sum::<f64>() / ch.len() as f64;
        let v = ch.iter().map(|x| (x - m).powi(2)).sum::<f64>() / ch.len() as f64;
        println!("  frequency {k:>2}: mean {m:+.2e}, variance {v:.3}");
    }

    let cb = coeffs.cb.as_ref().expect("color input");
    let up_pixels = coefficients_to_pixels(&pixel_upsample_coefficient_plane(cb));
    let up_blocks = coefficients_to_pixels(&nn_upsample_coefficient_plane(cb));
    println!(
        "Cb {}x{} -> {}x{} (pixel replication) / {}x{} (block replication)",
        cb.width(),
        cb.height(),
        up_pixels.width(),
        up_pixels.height(),
        up_blocks.width(),
        up_blocks.height()
    );
    Ok(())
}
