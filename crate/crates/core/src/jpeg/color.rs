//! Color conversion and chroma resampling on 8-bit planes.
//!
//! The conversion is the full-range JFIF matrix (Y = 0.299R + 0.587G + 0.114B, ...).

use super::types::{Image, PixelPlane};
use crate::error::{Error, Result};

#[inline]
fn to_u8(v: f64) -> u8 {
    // f64::round is half away from zero
    v.round().clamp(0.0, 255.0) as u8
}

fn three_planes(image: &Image) -> Result<[&PixelPlane; 3]> {
    match image.planes() {
        [a, b, c] => Ok([a, b, c]),
        planes => Err(Error::domain(format!("color conversion needs 3 planes, got {}", planes.len()))),
    }
}

pub fn rgb_to_ycbcr(image: &Image) -> Result<Image> {
    let [r, g, b] = three_planes(image)?;
    let n = r.samples().len();
    let (mut y, mut cb, mut cr) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (rv, gv, bv) = (r.samples()[i] as f64, g.samples()[i] as f64, b.samples()[i] as f64);
        y.push(to_u8(0.299 * rv + 0.587 * gv + 0.114 * bv));
        cb.push(to_u8(128.0 - 0.168736 * rv - 0.331264 * gv + 0.5 * bv));
        cr.push(to_u8(128.0 + 0.5 * rv - 0.418688 * gv - 0.081312 * bv));
    }
    let (w, h) = (image.width(), image.height());
    Image::new(vec![
        PixelPlane::new(w, h, y)?,
        PixelPlane::new(w, h, cb)?,
        PixelPlane::new(w, h, cr)?,
    ])
}

pub fn ycbcr_to_rgb(image: &Image) -> Result<Image> {
    let [y, cb, cr] = three_planes(image)?;
    let n = y.samples().len();
    let (mut r, mut g, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let yv = y.samples()[i] as f64;
        let cbv = cb.samples()[i] as f64 - 128.0;
        let crv = cr.samples()[i] as f64 - 128.0;
        r.push(to_u8(yv + 1.402 * crv));
        g.push(to_u8(yv - 0.344136 * cbv - 0.714136 * crv));
        b.push(to_u8(yv + 1.772 * cbv));
    }
    let (w, h) = (image.width(), image.height());
    Image::new(vec![
        PixelPlane::new(w, h, r)?,
        PixelPlane::new(w, h, g)?,
        PixelPlane::new(w, h, b)?,
    ])
}

/// Luma of an RGB image without rounding, used by metrics.
pub fn luma_f64(image: &Image) -> Vec<f64> {
    if image.is_gray() {
        return image.plane(0).samples().iter().map(|&v| v as f64).collect();
    }
    let (r, g, b) = (image.plane(0), image.plane(1), image.plane(2));
    (0..r.samples().len())
        .map(|i| 0.299 * r.samples()[i] as f64 + 0.587 * g.samples()[i] as f64 + 0.114 * b.samples()[i] as f64)
        .collect()
}

/// Pads right and bottom edges to a multiple of `mcu` by repeating the last
/// column and row.
pub fn pad_to_mcu(plane: &PixelPlane, mcu: usize) -> Result<PixelPlane> {
    if mcu != 8 && mcu != 16 {
        return Err(Error::domain(format!("MCU size must be 8 or 16, got {mcu}")));
    }
    if plane.width() == 0 || plane.height() == 0 {
        return Err(Error::domain("cannot pad an empty plane"));
    }
    let w = plane.width().div_ceil(mcu) * mcu;
    let h = plane.height().div_ceil(mcu) * mcu;
    let (lx, ly) = (plane.width() - 1, plane.height() - 1);
    Ok(PixelPlane::from_fn(w, h, |x, y| plane.get(x.min(lx), y.min(ly))))
}

/// 2×2 box mean, rounded half away from zero.
pub fn subsample_chroma(plane: &PixelPlane) -> Result<PixelPlane> {
    if plane.width() % 2 != 0 || plane.height() % 2 != 0 {
        return Err(Error::domain(format!(
            "subsampling needs even dimensions, got {}x{}",
            plane.width(),
            plane.height()
        )));
    }
    Ok(PixelPlane::from_fn(plane.width() / 2, plane.height() / 2, |x, y| {
        let sum = plane.get(2 * x, 2 * y) as u32
            + plane.get(2 * x + 1, 2 * y) as u32
            + plane.get(2 * x, 2 * y + 1) as u32
            + plane.get(2 * x + 1, 2 * y + 1) as u32;
        ((sum + 2) / 4) as u8
    }))
}

/// 2× nearest-neighbour replication.
pub fn upsample_chroma(plane: &PixelPlane) -> PixelPlane {
    PixelPlane::from_fn(plane.width() * 2, plane.height() * 2, |x, y| plane.get(x / 2, y / 2))
}
