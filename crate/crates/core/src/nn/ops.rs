//! Elementwise operators, reductions and PReLU.

use super::tensor::{numel, Tensor};
use crate::error::{Error, Result};

fn same_shape(a: &Tensor, b: &Tensor, op: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::domain(format!("{op}: shapes {:?} and {:?} differ", a.shape(), b.shape())));
    }
    Ok(())
}

impl Tensor {
    fn unary(&self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64 + 'static) -> Tensor {
        let data: Vec<f64> = self.data().iter().map(|&x| f(x)).collect();
        let x = self.clone();
        Tensor::from_op(self.shape(), data, vec![self.clone()], move |g| {
            vec![Some(g.iter().zip(x.data()).map(|(g, &x)| g * df(x)).collect())]
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        same_shape(self, other, "add")?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a + b).collect();
        Ok(Tensor::from_op(self.shape(), data, vec![self.clone(), other.clone()], |g| {
            vec![Some(g.to_vec()), Some(g.to_vec())]
        }))
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        same_shape(self, other, "sub")?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a - b).collect();
        Ok(Tensor::from_op(self.shape(), data, vec![self.clone(), other.clone()], |g| {
            vec![Some(g.to_vec()), Some(g.iter().map(|v| -v).collect())]
        }))
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        same_shape(self, other, "mul")?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a * b).collect();
        let (a, b) = (self.clone(), other.clone());
        Ok(Tensor::from_op(self.shape(), data, vec![self.clone(), other.clone()], move |g| {
            vec![
                a.requires_grad()
                    .then(|| g.iter().zip(b.data()).map(|(g, y)| g * y).collect()),
                b.requires_grad()
                    .then(|| g.iter().zip(a.data()).map(|(g, x)| g * x).collect()),
            ]
        }))
    }

    pub fn div(&self, other: &Tensor) -> Result<Tensor> {
        same_shape(self, other, "div")?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a / b).collect();
        let (a, b) = (self.clone(), other.clone());
        Ok(Tensor::from_op(self.shape(), data, vec![self.clone(), other.clone()], move |g| {
            let (x, y) = (a.data(), b.data());
            vec![
                a.requires_grad().then(|| g.iter().zip(y).map(|(g, y)| g / y).collect()),
                b.requires_grad()
                    .then(|| (0..g.len()).map(|i| -g[i] * x[i] / (y[i] * y[i])).collect()),
            ]
        }))
    }

    pub fn add_scalar(&self, c: f64) -> Tensor {
        self.unary(|x| x + c, |_| 1.0)
    }

    pub fn mul_scalar(&self, c: f64) -> Tensor {
        self.unary(|x| x * c, move |_| c)
    }

    pub fn neg(&self) -> Tensor {
        self.mul_scalar(-1.0)
    }

    /// Subgradient 0 at the kink.
    pub fn abs(&self) -> Tensor {
        self.unary(f64::abs, |x| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    pub fn square(&self) -> Tensor {
        self.unary(|x| x * x, |x| 2.0 * x)
    }

    /// `ln(1 + e^x)`, evaluated without overflow.
    pub fn softplus(&self) -> Tensor {
        self.unary(softplus, sigmoid)
    }

    pub fn sum(&self) -> Tensor {
        let n = self.numel();
        let total = self.data().iter().sum();
        Tensor::from_op([1, 1, 1, 1], vec![total], vec![self.clone()], move |g| vec![Some(vec![g[0]; n])])
    }

    pub fn mean(&self) -> Tensor {
        let n = self.numel();
        let total: f64 = self.data().iter().sum();
        Tensor::from_op([1, 1, 1, 1], vec![total / n as f64], vec![self.clone()], move |g| {
            vec![Some(vec![g[0] / n as f64; n])]
        })
    }

    /// `self - s` with a one-element `s` broadcast over every entry.
    pub fn sub_broadcast(&self, s: &Tensor) -> Result<Tensor> {
        let sv = s.item()?;
        let data = self.data().iter().map(|x| x - sv).collect();
        Ok(Tensor::from_op(self.shape(), data, vec![self.clone(), s.clone()], |g| {
            vec![Some(g.to_vec()), Some(vec![-g.iter().sum::<f64>()])]
        }))
    }

    /// Per-channel PReLU: `x` if positive, `a_c x` otherwise.
    pub fn prelu(&self, slopes: &Tensor) -> Result<Tensor> {
        let [n, c, h, w] = self.shape();
        if slopes.numel() != c {
            return Err(Error::domain(format!("prelu: {} slopes for {c} channels", slopes.numel())));
        }
        let hw = h * w;
        let a = slopes.data();
        let x = self.data();
        let mut out = vec![0.0; x.len()];
        for i in 0..x.len() {
            let ch = i / hw % c;
            out[i] = if x[i] > 0.0 { x[i] } else { a[ch] * x[i] };
        }
        let (xt, at) = (self.clone(), slopes.clone());
        Ok(Tensor::from_op(self.shape(), out, vec![self.clone(), slopes.clone()], move |g| {
            let (x, a) = (xt.data(), at.data());
            let gx = xt.requires_grad().then(|| {
                (0..g.len())
                    .map(|i| if x[i] > 0.0 { g[i] } else { a[i / hw % c] * g[i] })
                    .collect()
            });
            let ga = at.requires_grad().then(|| {
                let mut ga = vec![0.0; c];
                for b in 0..n {
                    for ch in 0..c {
                        let base = (b * c + ch) * hw;
                        for i in base..base + hw {
                            if x[i] <= 0.0 {
                                ga[ch] += g[i] * x[i];
                            }
                        }
                    }
                }
                ga
            });
            vec![gx, ga]
        }))
    }

    /// Same data under a new shape with equal element count.
    pub fn reshape(&self, shape: [usize; 4]) -> Result<Tensor> {
        if numel(&shape) != self.numel() {
            return Err(Error::domain(format!("cannot reshape {:?} to {shape:?}", self.shape())));
        }
        Ok(Tensor::from_op(shape, self.to_vec(), vec![self.clone()], |g| vec![Some(g.to_vec())]))
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
