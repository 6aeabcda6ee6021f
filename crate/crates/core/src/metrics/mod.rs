//! PSNR, PSNR-B and SSIM on 8-bit images.
//!
//! Dataset numbers are unweighted means of per-image values. How color images
//! are reduced to planes is controlled by [`MetricsConvention`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::jpeg::Image;

/// Reported for identical inputs instead of +∞.
pub const PSNR_CAP: f64 = 100.0;

const PEAK: f64 = 255.0;
pub const SSIM_WINDOW: usize = 11;
const WIN: usize = SSIM_WINDOW;
const SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
const K1: f64 = SSIM_K1;
pub const SSIM_K2: f64 = 0.03;
const K2: f64 = SSIM_K2;

/// Which planes each metric sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricsConvention {
    /// PSNR over all RGB samples jointly, SSIM averaged over R, G, B, PSNR-B on luma.
    #[default]
    Standard,
    /// All three metrics on full-range luma.
    Luma,
    /// All three on limited-range BT.601 luma rounded to 8 bits (MATLAB `rgb2ycbcr`).
    StudioLuma,
    /// Each metric computed on R, G and B separately, then averaged.
    PerChannel,
}

impl MetricsConvention {
    pub const ALL: [MetricsConvention; 4] = [
        MetricsConvention::Standard,
        MetricsConvention::Luma,
        MetricsConvention::StudioLuma,
        MetricsConvention::PerChannel,
    ];
}

impl FromStr for MetricsConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "luma" => Ok(Self::Luma),
            "studio-luma" => Ok(Self::StudioLuma),
            "per-channel" => Ok(Self::PerChannel),
            other => Err(Error::Config(format!(
                "unknown metrics convention '{other}' (standard, luma, studio-luma, per-channel)"
            ))),
        }
    }
}

impl fmt::Display for MetricsConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Standard => "standard",
            Self::Luma => "luma",
            Self::StudioLuma => "studio-luma",
            Self::PerChannel => "per-channel",
        })
    }
}

/// A real-valued plane borrowed by the metric kernels.
#[derive(Debug, Clone, Copy)]
pub struct PlaneRef<'a> {
    pub width: usize,
    pub height: usize,
    pub data: &'a [f64],
}

impl<'a> PlaneRef<'a> {
    pub fn new(width: usize, height: usize, data: &'a [f64]) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::domain("plane data does not match its dimensions"));
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTriple {
    pub psnr: f64,
    pub psnr_b: f64,
    pub ssim: f64,
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP;
    }
    (10.0 * (PEAK * PEAK / mse).log10()).min(PSNR_CAP)
}

fn same_shape(a: &Image, b: &Image) -> Result<()> {
    if (a.width(), a.height(), a.channels()) != (b.width(), b.height(), b.channels()) {
        return Err(Error::domain(format!(
            "metric inputs differ: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    Ok(())
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

pub fn psnr_plane(a: PlaneRef<'_>, b: PlaneRef<'_>) -> Result<f64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::domain("psnr planes differ in size"));
    }
    Ok(psnr_from_mse(mse(a.data, b.data)))
}

/// PSNR over every sample of every channel.
pub fn psnr(x: &Image, y: &Image) -> Result<f64> {
    same_shape(x, y)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (p, q) in x.planes().iter().zip(y.planes()) {
        for (&a, &b) in p.samples().iter().zip(q.samples()) {
            let d = a as f64 - b as f64;
            sum += d * d;
        }
        n += p.samples().len();
    }
    Ok(psnr_from_mse(sum / n as f64))
}

/// Normalized 1-D Gaussian taps; the 11×11 window is their outer product.
pub fn gaussian_taps() -> [f64; WIN] {
    let mut g = [0.0; WIN];
    let c = (WIN / 2) as f64;
    for (i, v) in g.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Separable valid-mode Gaussian filter.
fn filter_valid(data: &[f64], w: usize, h: usize, g: &[f64; WIN]) -> Vec<f64> {
    let ow = w + 1 - WIN;
    let oh = h + 1 - WIN;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let line = &data[y * w..(y + 1) * w];
        for x in 0..ow {
            let mut acc = 0.0;
            for k in 0..WIN {
                acc += g[k] * line[x + k];
            }
            rows[y * ow + x] = acc;
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for k in 0..WIN {
                acc += g[k] * rows[(y + k) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

/// Local SSIM map over the valid region with peak value `peak`.
pub fn ssim_map(a: PlaneRef<'_>, b: PlaneRef<'_>, peak: f64) -> Result<Vec<f64>> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::domain("ssim planes differ in size"));
    }
    if a.width < WIN || a.height < WIN {
        return Err(Error::domain(format!(
            "ssim needs at least {WIN}x{WIN} pixels, got {}x{}",
            a.width, a.height
        )));
    }
    let (w, h) = (a.width, a.height);
    let g = gaussian_taps();
    let xx: Vec<f64> = a.data.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = b.data.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = a.data.iter().zip(b.data).map(|(p, q)| p * q).collect();
    let mx = filter_valid(a.data, w, h, &g);
    let my = filter_valid(b.data, w, h, &g);
    let sxx = filter_valid(&xx, w, h, &g);
    let syy = filter_valid(&yy, w, h, &g);
    let sxy = filter_valid(&xy, w, h, &g);
    let c1 = (K1 * peak).powi(2);
    let c2 = (K2 * peak).powi(2);
    Ok((0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .collect())
}

pub fn ssim_plane(a: PlaneRef<'_>, b: PlaneRef<'_>) -> Result<f64> {
    let map = ssim_map(a, b, PEAK)?;
    Ok(map.iter().sum::<f64>() / map.len() as f64)
}

fn planes_f64(img: &Image) -> Vec<Vec<f64>> {
    img.planes()
        .iter()
        .map(|p| p.samples().iter().map(|&v| v as f64).collect())
        .collect()
}

/// Mean SSIM averaged over channels.
pub fn ssim(x: &Image, y: &Image) -> Result<f64> {
    same_shape(x, y)?;
    let (w, h) = (x.width(), x.height());
    let (px, py) = (planes_f64(x), planes_f64(y));
    let mut total = 0.0;
    for (a, b) in px.iter().zip(&py) {
        total += ssim_plane(PlaneRef::new(w, h, a)?, PlaneRef::new(w, h, b)?)?;
    }
    Ok(total / px.len() as f64)
}

/// Blocking effect factor of one plane for 8×8 blocks anchored at the origin:
/// η·(D_B − D_B̄) with η = log2(8)/log2(min(H, W)), floored at zero.
pub fn blocking_effect_factor(p: PlaneRef<'_>) -> Result<f64> {
    let (w, h) = (p.width, p.height);
    if w < 16 || h < 16 {
        return Err(Error::domain(format!("psnr-b needs at least 16x16 pixels, got {w}x{h}")));
    }
    let (mut boundary, mut nb) = (0.0, 0usize);
    let (mut inner, mut ni) = (0.0, 0usize);
    for y in 0..h {
        for x in 0..w - 1 {
            let d = p.at(x, y) - p.at(x + 1, y);
            if (x + 1) % 8 == 0 {
                boundary += d * d;
                nb += 1;
            } else {
                inner += d * d;
                ni += 1;
            }
        }
    }
    for y in 0..h - 1 {
        for x in 0..w {
            let d = p.at(x, y) - p.at(x, y + 1);
            if (y + 1) % 8 == 0 {
                boundary += d * d;
                nb += 1;
            } else {
                inner += d * d;
                ni += 1;
            }
        }
    }
    let db = boundary / nb as f64;
    let dbc = inner / ni as f64;
    if db <= dbc {
        return Ok(0.0);
    }
    let eta = 3.0 / (w.min(h) as f64).log2();
    Ok(eta * (db - dbc))
}

/// PSNR-B of `test` against `original`; blockiness is measured on `test`.
pub fn psnr_b_plane(original: PlaneRef<'_>, test: PlaneRef<'_>) -> Result<f64> {
    if (original.width, original.height) != (test.width, test.height) {
        return Err(Error::domain("psnr-b planes differ in size"));
    }
    let bef = blocking_effect_factor(test)?;
    let m = mse(original.data, test.data);
    if m == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok(psnr_from_mse(m + bef))
}

/// PSNR-B on the luma plane.
pub fn psnr_b(original: &Image, test: &Image) -> Result<f64> {
    same_shape(original, test)?;
    let (w, h) = (original.width(), original.height());
    let (a, b) = (full_luma(original), full_luma(test));
    psnr_b_plane(PlaneRef::new(w, h, &a)?, PlaneRef::new(w, h, &b)?)
}

fn full_luma(img: &Image) -> Vec<f64> {
    crate::jpeg::color::luma_f64(img)
}

fn studio_luma(img: &Image) -> Vec<f64> {
    if img.is_gray() {
        return img.plane(0).samples().iter().map(|&v| v as f64).collect();
    }
    let (r, g, b) = (img.plane(0).samples(), img.plane(1).samples(), img.plane(2).samples());
    (0..r.len())
        .map(|i| (16.0 + (65.481 * r[i] as f64 + 128.553 * g[i] as f64 + 24.966 * b[i] as f64) / 255.0).round())
        .collect()
}

fn triple_on(w: usize, h: usize, a: &[f64], b: &[f64]) -> Result<MetricTriple> {
    let (pa, pb) = (PlaneRef::new(w, h, a)?, PlaneRef::new(w, h, b)?);
    Ok(MetricTriple {
        psnr: psnr_plane(pa, pb)?,
        psnr_b: psnr_b_plane(pa, pb)?,
        ssim: ssim_plane(pa, pb)?,
    })
}

/// All three metrics of `test` against `original` under a convention.
pub fn evaluate(original: &Image, test: &Image, convention: MetricsConvention) -> Result<MetricTriple> {
    same_shape(original, test)?;
    let (w, h) = (original.width(), original.height());
    match convention {
        MetricsConvention::Standard => Ok(MetricTriple {
            psnr: psnr(original, test)?,
            psnr_b: psnr_b(original, test)?,
            ssim: ssim(original, test)?,
        }),
        MetricsConvention::Luma => triple_on(w, h, &full_luma(original), &full_luma(test)),
        MetricsConvention::StudioLuma => triple_on(w, h, &studio_luma(original), &studio_luma(test)),
        MetricsConvention::PerChannel => {
            let (pa, pb) = (planes_f64(original), planes_f64(test));
            let n = pa.len() as f64;
            let mut acc = MetricTriple {
                psnr: 0.0,
                psnr_b: 0.0,
                ssim: 0.0,
            };
            for (a, b) in pa.iter().zip(&pb) {
                let t = triple_on(w, h, a, b)?;
                acc.psnr += t.psnr / n;
                acc.psnr_b += t.psnr_b / n;
                acc.ssim += t.ssim / n;
            }
            Ok(acc)
        }
    }
}
