//! Central finite-difference checks of analytic gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tensor::{Shape, Tensor};
use crate::error::Result;

/// Gradients smaller than this are compared in absolute terms.
pub const ABS_FLOOR: f64 = 1e-5;

/// `|a - n| / max(|a|, |n|, ABS_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(ABS_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Worst {
    pub input: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub worst: Option<Worst>,
}

/// Which entries of each input to perturb.
#[derive(Debug, Clone, Copy)]
pub enum Coverage {
    All,
    /// Up to `per_input` distinct entries per input, chosen by `seed`.
    Sample { per_input: usize, seed: u64 },
}

/// Compares the gradient of the scalar `f(inputs)` from [`Tensor::backward`]
/// with central differences of step `h`.
pub fn check_gradients(
    f: impl Fn(&[Tensor]) -> Result<Tensor>,
    inputs: &[(Shape, Vec<f64>)],
    h: f64,
    coverage: Coverage,
) -> Result<GradReport> {
    let leaves = inputs
        .iter()
        .map(|(s, v)| Tensor::leaf(*s, v.clone()))
        .collect::<Result<Vec<_>>>()?;
    f(&leaves)?.backward()?;
    let analytic: Vec<Vec<f64>> = leaves
        .iter()
        .map(|t| t.grad().unwrap_or_else(|| vec![0.0; t.numel()]))
        .collect();

    let eval = |which: usize, index: usize, delta: f64| -> Result<f64> {
        let ts = inputs
            .iter()
            .enumerate()
            .map(|(i, (s, v))| {
                let mut v = v.clone();
                if i == which {
                    v[index] += delta;
                }
                Tensor::new(*s, v)
            })
            .collect::<Result<Vec<_>>>()?;
        f(&ts)?.item()
    };

    let mut report = GradReport {
        max_rel_error: 0.0,
        checked: 0,
        worst: None,
    };
    for (which, (_, values)) in inputs.iter().enumerate() {
        let indices: Vec<usize> = match coverage {
            Coverage::All => (0..values.len()).collect(),
            Coverage::Sample { per_input, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(which as u64));
                let mut idx = sample(&mut rng, values.len(), per_input.min(values.len())).into_vec();
                idx.sort_unstable();
                idx
            }
        };
        for index in indices {
            let numeric = (eval(which, index, h)? - eval(which, index, -h)?) / (2.0 * h);
            let a = analytic[which][index];
            let err = relative_error(a, numeric);
            report.checked += 1;
            if report.worst.is_none() || err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some(Worst {
                    input: which,
                    index,
                    analytic: a,
                    numeric,
                });
            }
        }
    }
    Ok(report)
}
