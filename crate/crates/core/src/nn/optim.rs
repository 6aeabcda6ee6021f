//! Adam and learning-rate schedules.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::params::ParamStore;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam over named parameters.
#[derive(Debug, Clone, Default)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    m: BTreeMap<String, Vec<f64>>,
    v: BTreeMap<String, Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Updates every parameter that has a gradient; others are left alone.
    /// A non-finite gradient aborts before anything changes.
    pub fn step(&mut self, params: &mut ParamStore, grads: &BTreeMap<String, Vec<f64>>, lr: f64) -> Result<()> {
        for (name, g) in grads {
            let p = params
                .get(name)
                .ok_or_else(|| Error::domain(format!("gradient for unknown parameter {name}")))?;
            if p.data.len() != g.len() {
                return Err(Error::domain(format!("gradient of {name} has {} entries, expected {}", g.len(), p.data.len())));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: format!("gradient of {name}"),
                    step: self.step as usize,
                });
            }
        }
        self.step += 1;
        let AdamConfig { beta1, beta2, eps } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for (name, g) in grads {
            let p = params.get_mut(name).expect("checked above");
            let m = self.m.entry(name.clone()).or_insert_with(|| vec![0.0; g.len()]);
            let v = self.v.entry(name.clone()).or_insert_with(|| vec![0.0; g.len()]);
            for i in 0..g.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p.data[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Constant(f64),
    /// Halves every `period` steps, never below `floor`.
    StepDecay { base: f64, period: u64, floor: f64 },
    /// Cosine annealing from `base` to `final_lr` over `total` steps, then flat.
    Cosine { base: f64, final_lr: f64, total: u64 },
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LrSchedule::Constant(lr) => lr > 0.0,
            LrSchedule::StepDecay { base, period, floor } => base >= floor && floor > 0.0 && period > 0,
            LrSchedule::Cosine { base, final_lr, total } => base >= final_lr && final_lr > 0.0 && total > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid learning-rate schedule {self:?}")))
        }
    }

    pub fn lr_at(&self, step: u64) -> f64 {
        match *self {
            LrSchedule::Constant(lr) => lr,
            LrSchedule::StepDecay { base, period, floor } => {
                let halvings = (step / period).min(1074) as i32;
                (base * 2f64.powi(-halvings)).max(floor)
            }
            LrSchedule::Cosine { base, final_lr, total } => {
                let t = step.min(total) as f64 / total as f64;
                final_lr + (base - final_lr) * (1.0 + (PI * t).cos()) / 2.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(values: &[f64]) -> ParamStore {
        let mut s = ParamStore::new();
        s.insert("w", [1, 1, 1, values.len()], values.to_vec()).unwrap();
        s
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = store(&[1.0, -2.0]);
        let mut adam = Adam::default();
        let g = BTreeMap::from([("w".to_string(), vec![0.0, 0.0])]);
        adam.step(&mut p, &g, 1e-3).unwrap();
        assert_eq!(p.get("w").unwrap().data, vec![1.0, -2.0]);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps)
        let mut p = store(&[0.0, 0.0, 0.0]);
        let mut adam = Adam::default();
        let g = vec![3.0, -0.5, 1e-3];
        adam.step(&mut p, &BTreeMap::from([("w".to_string(), g.clone())]), 0.01).unwrap();
        for (x, gi) in p.get("w").unwrap().data.iter().zip(&g) {
            let expected = -0.01 * gi / (gi.abs() + 1e-8);
            assert!((x - expected).abs() < 1e-15, "{x} vs {expected}");
        }
    }

    #[test]
    fn nan_gradient_names_the_parameter() {
        let mut p = store(&[1.0]);
        let mut adam = Adam::default();
        let err = adam
            .step(&mut p, &BTreeMap::from([("w".to_string(), vec![f64::NAN])]), 1e-3)
            .unwrap_err();
        assert!(err.to_string().contains("gradient of w"), "{err}");
        assert_eq!(p.get("w").unwrap().data, vec![1.0]);
        assert_eq!(adam.steps(), 0);
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let mut p = store(&[0.3, -0.7]);
            let mut adam = Adam::default();
            for k in 0..50 {
                let w = p.get("w").unwrap().data.clone();
                let g = vec![2.0 * w[0] + k as f64 * 1e-3, (w[1] - 0.1).sin()];
                adam.step(&mut p, &BTreeMap::from([("w".to_string(), g)]), 1e-2).unwrap();
            }
            p.get("w").unwrap().data.clone()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn schedules() {
        let s = LrSchedule::StepDecay {
            base: 1e-3,
            period: 100_000,
            floor: 1e-9,
        };
        assert_eq!(s.lr_at(0), 1e-3);
        assert_eq!(s.lr_at(99_999), 1e-3);
        assert_eq!(s.lr_at(200_000), 2.5e-4);
        let c = LrSchedule::Cosine {
            base: 1e-3,
            final_lr: 1e-6,
            total: 1000,
        };
        assert!((c.lr_at(500) - 5.005e-4).abs() < 1e-15);
        assert_eq!(c.lr_at(0), 1e-3);
        assert!((c.lr_at(1000) - 1e-6).abs() < 1e-18);
        assert_eq!(c.lr_at(5000), c.lr_at(1000));
        assert!(LrSchedule::Cosine {
            base: 1e-6,
            final_lr: 1e-3,
            total: 10
        }
        .validate()
        .is_err());
    }
}
