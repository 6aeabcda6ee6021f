//! Equivalent-quality search and DCT frequency saturation.

use crate::error::{Error, Result};
use crate::jpeg::{decode_jpeg_pixels, encode_jpeg, CoefficientPlane, EncodeOptions, Image, QuantizedPlane, Subsampling};
use crate::metrics::ssim;

/// First quality whose JPEG matches the restoration's SSIM, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentQuality {
    pub start_quality: u8,
    /// `None` when no quality up to 100 reaches the target.
    pub quality: Option<u8>,
    pub target_ssim: f64,
    /// `size(jpeg at quality) − size(jpeg at start_quality)`.
    pub bytes_saved: Option<i64>,
}

/// Scans qualities upward from `start_quality` for the first JPEG whose
/// SSIM against `original` is at least that of `restored`.
pub fn equivalent_quality(original: &Image, restored: &Image, start_quality: u8, subsampling: Subsampling) -> Result<EquivalentQuality> {
    if !(1..=100).contains(&start_quality) {
        return Err(Error::domain(format!("start quality {start_quality} outside 1..=100")));
    }
    let target = ssim(original, restored)?;
    let size = |q: u8| -> Result<Vec<u8>> { encode_jpeg(original, &EncodeOptions::new(q, subsampling)) };
    let start_bytes = size(start_quality)?.len() as i64;
    for q in start_quality..=100 {
        let jpeg = size(q)?;
        if ssim(original, &decode_jpeg_pixels(&jpeg)?)? >= target {
            return Ok(EquivalentQuality {
                start_quality,
                quality: Some(q),
                target_ssim: target,
                bytes_saved: Some(jpeg.len() as i64 - start_bytes),
            });
        }
    }
    Ok(EquivalentQuality {
        start_quality,
        quality: None,
        target_ssim: target,
        bytes_saved: None,
    })
}

/// How the 64 coefficients are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyGrouping {
    /// 15 anti-diagonals `i + j`.
    #[default]
    AntiDiagonal,
    /// Each coefficient alone, raster order.
    PerCoefficient,
}

impl FrequencyGrouping {
    pub fn groups(self) -> usize {
        match self {
            FrequencyGrouping::AntiDiagonal => 15,
            FrequencyGrouping::PerCoefficient => 64,
        }
    }

    pub fn group_of(self, k: usize) -> usize {
        match self {
            FrequencyGrouping::AntiDiagonal => k / 8 + k % 8,
            FrequencyGrouping::PerCoefficient => k,
        }
    }

    /// Coefficients per group; sums to 64.
    pub fn group_sizes(self) -> Vec<usize> {
        let mut sizes = vec![0; self.groups()];
        for k in 0..64 {
            sizes[self.group_of(k)] += 1;
        }
        sizes
    }
}

impl std::str::FromStr for FrequencyGrouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" | "15" => Ok(Self::AntiDiagonal),
            "coefficient" | "64" => Ok(Self::PerCoefficient),
            other => Err(Error::Config(format!("unknown frequency grouping '{other}' (diagonal or coefficient)"))),
        }
    }
}

fn saturation(blocks: usize, value: impl Fn(usize, usize) -> f64, grouping: FrequencyGrouping) -> Vec<f64> {
    let sizes = grouping.group_sizes();
    let mut set = vec![0usize; sizes.len()];
    for b in 0..blocks {
        for k in 0..64 {
            if value(b, k).abs() > 0.0 {
                set[grouping.group_of(k)] += 1;
            }
        }
    }
    set.iter()
        .zip(&sizes)
        .map(|(&s, &n)| if blocks == 0 { 0.0 } else { s as f64 / (n * blocks) as f64 })
        .collect()
}

/// Fraction of coefficients with nonzero magnitude in each frequency group.
pub fn frequency_saturation(plane: &CoefficientPlane, grouping: FrequencyGrouping) -> Vec<f64> {
    let cols = plane.block_cols;
    saturation(
        plane.block_rows * cols,
        |b, k| plane.get((b / cols) * 8 + k / 8, (b % cols) * 8 + k % 8),
        grouping,
    )
}

/// Same, on quantized integers.
pub fn frequency_saturation_quantized(plane: &QuantizedPlane, grouping: FrequencyGrouping) -> Vec<f64> {
    saturation(plane.blocks.len(), |b, k| plane.blocks[b].0[k] as f64, grouping)
}
