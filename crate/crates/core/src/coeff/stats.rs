use crate::error::{Error, Result};
use crate::jpeg::{ChannelRole, CoefficientPlane, QuantMatrix};

pub const STD_FLOOR: f64 = 1e-6;

/// Per-frequency mean and standard deviation for one channel role.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyStats {
    pub role: ChannelRole,
    pub mean: [f64; 64],
    pub std: [f64; 64],
}

impl FrequencyStats {
    /// Zero mean, unit deviation.
    pub fn identity(role: ChannelRole) -> Self {
        Self {
            role,
            mean: [0.0; 64],
            std: [1.0; 64],
        }
    }

    pub fn new(role: ChannelRole, mean: [f64; 64], std: [f64; 64]) -> Result<Self> {
        if let Some(k) = std.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::domain(format!("std[{k}] = {} must be positive", std[k])));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::domain("non-finite mean"));
        }
        Ok(Self { role, mean, std })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub luma: FrequencyStats,
    pub chroma: FrequencyStats,
}

impl NormalizationStats {
    pub fn identity() -> Self {
        Self {
            luma: FrequencyStats::identity(ChannelRole::Luma),
            chroma: FrequencyStats::identity(ChannelRole::Chroma),
        }
    }

    pub fn for_role(&self, role: ChannelRole) -> &FrequencyStats {
        match role {
            ChannelRole::Luma => &self.luma,
            ChannelRole::Chroma => &self.chroma,
        }
    }
}

/// Mean and population standard deviation of every frequency over all blocks
/// of the corpus (two passes). Deviations are floored at [`STD_FLOOR`].
pub fn compute_normalization_stats(corpus: &[CoefficientPlane], role: ChannelRole) -> Result<FrequencyStats> {
    let blocks: usize = corpus.iter().map(|p| p.block_rows * p.block_cols).sum();
    if blocks == 0 {
        return Err(Error::domain("cannot fit statistics on an empty corpus"));
    }
    let n = blocks as f64;
    let mut mean = [0.0; 64];
    for plane in corpus {
        for r in 0..plane.block_rows {
            for c in 0..plane.block_cols {
                for (m, v) in mean.iter_mut().zip(plane.block(r, c)) {
                    *m += v;
                }
            }
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 64];
    for plane in corpus {
        for r in 0..plane.block_rows {
            for c in 0..plane.block_cols {
                for (k, v) in plane.block(r, c).iter().enumerate() {
                    var[k] += (v - mean[k]) * (v - mean[k]);
                }
            }
        }
    }
    let std = var.map(|v| (v / n).sqrt().max(STD_FLOOR));
    Ok(FrequencyStats { role, mean, std })
}

fn check_role(plane: &CoefficientPlane, stats: &FrequencyStats) -> Result<()> {
    if plane.quant.role() != stats.role {
        return Err(Error::domain(format!(
            "{:?} statistics applied to a {:?} plane",
            stats.role,
            plane.quant.role()
        )));
    }
    Ok(())
}

fn per_frequency(plane: &CoefficientPlane, f: impl Fn(usize, f64) -> f64) -> CoefficientPlane {
    let w = plane.width();
    let mut out = plane.clone();
    for (i, v) in out.values.iter_mut().enumerate() {
        let (row, col) = (i / w, i % w);
        *v = f((row % 8) * 8 + col % 8, *v);
    }
    out
}

/// `(x - mean[k]) / std[k]` for every coefficient of frequency `k`.
pub fn normalize_plane(plane: &CoefficientPlane, stats: &FrequencyStats) -> Result<CoefficientPlane> {
    check_role(plane, stats)?;
    Ok(per_frequency(plane, |k, v| (v - stats.mean[k]) / stats.std[k]))
}

pub fn denormalize_plane(plane: &CoefficientPlane, stats: &FrequencyStats) -> Result<CoefficientPlane> {
    check_role(plane, stats)?;
    Ok(per_frequency(plane, |k, v| v * stats.std[k] + stats.mean[k]))
}

/// Divisors scaled to (0, 1]; 1 means the coarsest quantization.
pub fn normalize_quant_matrix(q: &QuantMatrix) -> [f64; 64] {
    q.entries().map(|e| e as f64 / 255.0)
}
