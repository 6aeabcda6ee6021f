//! Parameter initialization.

use rand::Rng;

/// Default negative slope of PReLU units.
pub const PRELU_INIT: f64 = 0.25;

/// Kaiming-uniform bound for a layer followed by a leaky unit with slope `a`.
pub fn kaiming_bound(fan_in: usize, a: f64) -> f64 {
    let gain = (2.0 / (1.0 + a * a)).sqrt();
    gain * (3.0 / fan_in as f64).sqrt()
}

pub fn kaiming_uniform<R: Rng>(rng: &mut R, fan_in: usize, count: usize) -> Vec<f64> {
    let b = kaiming_bound(fan_in, PRELU_INIT);
    (0..count).map(|_| rng.gen_range(-b..b)).collect()
}

/// Uniform in `±1/sqrt(fan_in)`, used for biases.
pub fn bias_uniform<R: Rng>(rng: &mut R, fan_in: usize, count: usize) -> Vec<f64> {
    let b = 1.0 / (fan_in as f64).sqrt();
    (0..count).map(|_| rng.gen_range(-b..b)).collect()
}
