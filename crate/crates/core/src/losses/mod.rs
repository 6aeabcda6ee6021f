//! Differentiable training objectives: the regression loss (mean L1 minus
//! weighted SSIM), the texture loss over a pluggable feature extractor, the
//! relativistic-average generator loss and their weighted GAN total.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{gaussian_taps, SSIM_K1, SSIM_K2, SSIM_WINDOW};
use crate::nn::init::{kaiming_uniform, PRELU_INIT};
use crate::nn::{block_idct, conv2d, ConvSpec, Tensor};

/// Balancing weights of the objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    /// SSIM weight in the regression loss.
    pub lambda: f64,
    /// Adversarial weight in the GAN loss.
    pub gamma: f64,
    /// L1 weight in the GAN loss.
    pub nu: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            gamma: 5e-3,
            nu: 1e-2,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("gamma", self.gamma), ("nu", self.nu)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("loss weight {name} = {v} must be a non-negative number")));
            }
        }
        Ok(())
    }
}

fn same_shape(x: &Tensor, y: &Tensor, what: &str) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::domain(format!("{what}: shapes {:?} and {:?} differ", x.shape(), y.shape())));
    }
    Ok(())
}

pub fn mean_l1(x: &Tensor, y: &Tensor) -> Result<Tensor> {
    same_shape(x, y, "mean L1")?;
    Ok(x.sub(y)?.abs().mean())
}

/// Depthwise separable Gaussian filter over the valid region.
fn gaussian_valid(x: &Tensor) -> Result<Tensor> {
    let c = x.shape()[1];
    let taps = gaussian_taps();
    let horizontal = ConvSpec {
        kernel_h: 1,
        kernel_w: SSIM_WINDOW,
        ..ConvSpec::new(c, c, 1).groups(c)
    };
    let vertical = ConvSpec {
        kernel_h: SSIM_WINDOW,
        kernel_w: 1,
        ..horizontal
    };
    let row = Tensor::new([c, 1, 1, SSIM_WINDOW], taps.repeat(c))?;
    let col = Tensor::new([c, 1, SSIM_WINDOW, 1], taps.repeat(c))?;
    conv2d(&conv2d(x, &row, None, &horizontal)?, &col, None, &vertical)
}

/// Mean local SSIM over all channels and batch items, with the same windows
/// and constants as [`crate::metrics::ssim_map`]; `peak` is the dynamic range.
pub fn ssim_loss_term(x: &Tensor, y: &Tensor, peak: f64) -> Result<Tensor> {
    same_shape(x, y, "SSIM")?;
    let [_, _, h, w] = x.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::domain(format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}")));
    }
    let c1 = (SSIM_K1 * peak).powi(2);
    let c2 = (SSIM_K2 * peak).powi(2);
    let mx = gaussian_valid(x)?;
    let my = gaussian_valid(y)?;
    let sxx = gaussian_valid(&x.square())?;
    let syy = gaussian_valid(&y.square())?;
    let sxy = gaussian_valid(&x.mul(y)?)?;
    let mxy = mx.mul(&my)?;
    let vx = sxx.sub(&mx.square())?;
    let vy = syy.sub(&my.square())?;
    let cov = sxy.sub(&mxy)?;
    let num = mxy.mul_scalar(2.0).add_scalar(c1).mul(&cov.mul_scalar(2.0).add_scalar(c2))?;
    let den = mx.square().add(&my.square())?.add_scalar(c1).mul(&vx.add(&vy)?.add_scalar(c2))?;
    Ok(num.div(&den)?.mean())
}

/// `mean|y − x| − λ·SSIM(x, y)` on images scaled to [0, 1].
pub fn l_jpeg(x: &Tensor, y: &Tensor, lambda: f64) -> Result<Tensor> {
    let l1 = mean_l1(x, y)?;
    if lambda == 0.0 {
        return Ok(l1);
    }
    l1.sub(&ssim_loss_term(x, y, 1.0)?.mul_scalar(lambda))
}

/// `mean|y − x| + λ·(1 − SSIM)`: the same gradient as [`l_jpeg`], shifted to
/// be non-negative so relative decreases are meaningful.
pub fn l_jpeg_shifted(x: &Tensor, y: &Tensor, lambda: f64) -> Result<Tensor> {
    Ok(l_jpeg(x, y, lambda)?.add_scalar(lambda))
}

/// Spatially laid out DCT coefficients (level-shifted, unnormalized) to
/// pixels in [0, 1] scale, inside the graph.
pub fn coefficients_to_unit_pixels(coeffs: &Tensor) -> Result<Tensor> {
    Ok(block_idct(coeffs)?.add_scalar(128.0).mul_scalar(1.0 / 255.0))
}

/// A fixed, differentiable image-to-features map.
pub trait FeatureExtractor {
    fn id(&self) -> &str;
    fn extract(&self, x: &Tensor) -> Result<Tensor>;
}

/// Features are the image itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityExtractor;

impl FeatureExtractor for IdentityExtractor {
    fn id(&self) -> &str {
        "identity"
    }

    fn extract(&self, x: &Tensor) -> Result<Tensor> {
        Ok(x.clone())
    }
}

/// Frozen random 3×3 convolutions with PReLU between them, a stand-in for a
/// pretrained feature network.
#[derive(Debug, Clone)]
pub struct RandomConvExtractor {
    id: String,
    layers: Vec<(Tensor, ConvSpec)>,
    slope: f64,
}

impl RandomConvExtractor {
    pub fn new(in_channels: usize, widths: &[usize], seed: u64) -> Result<Self> {
        if in_channels == 0 || widths.is_empty() || widths.contains(&0) {
            return Err(Error::Config("random extractor needs positive widths".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let mut cin = in_channels;
        for &w in widths {
            let spec = ConvSpec::new(cin, w, 3).padding(1);
            let weight = Tensor::new(spec.weight_shape(), kaiming_uniform(&mut rng, spec.fan_in(), w * cin * 9))?;
            layers.push((weight, spec));
            cin = w;
        }
        Ok(Self {
            id: format!("random-conv-{seed}"),
            layers,
            slope: PRELU_INIT,
        })
    }
}

impl FeatureExtractor for RandomConvExtractor {
    fn id(&self) -> &str {
        &self.id
    }

    fn extract(&self, x: &Tensor) -> Result<Tensor> {
        let mut h = x.clone();
        for (i, (w, spec)) in self.layers.iter().enumerate() {
            if h.shape()[1] != spec.in_channels {
                return Err(Error::domain(format!(
                    "extractor {} expects {} channels, got {}",
                    self.id,
                    spec.in_channels,
                    h.shape()[1]
                )));
            }
            h = conv2d(&h, w, None, spec)?;
            if i + 1 < self.layers.len() {
                h = h.prelu(&Tensor::full([1, spec.out_channels, 1, 1], self.slope))?;
            }
        }
        Ok(h)
    }
}

/// Mean L1 distance between the features of `x` and `y`.
pub fn texture_loss(x: &Tensor, y: &Tensor, f: &dyn FeatureExtractor) -> Result<Tensor> {
    let (fx, fy) = (f.extract(x)?, f.extract(y)?);
    if fx.shape() != fy.shape() {
        return Err(Error::domain(format!(
            "extractor {} gave shapes {:?} and {:?}",
            f.id(),
            fx.shape(),
            fy.shape()
        )));
    }
    mean_l1(&fx, &fy)
}

/// Relativistic-average generator loss
/// `E[softplus(−(D_f − E D_r))] + E[softplus(D_r − E D_f)]`, which is the
/// log-sigmoid form written without overflow.
pub fn ragan_generator_loss(d_real: &Tensor, d_fake: &Tensor) -> Result<Tensor> {
    if d_real.numel() == 0 || d_fake.numel() == 0 {
        return Err(Error::domain("relativistic loss needs non-empty score batches"));
    }
    let fake_term = d_fake.sub_broadcast(&d_real.mean())?.neg().softplus().mean();
    let real_term = d_real.sub_broadcast(&d_fake.mean())?.softplus().mean();
    fake_term.add(&real_term)
}

/// `texture + γ·RaGAN + ν·mean L1`.
pub fn gan_total_loss(
    x: &Tensor,
    y: &Tensor,
    d_real: &Tensor,
    d_fake: &Tensor,
    f: &dyn FeatureExtractor,
    weights: &LossWeights,
) -> Result<Tensor> {
    weights.validate()?;
    let texture = texture_loss(x, y, f)?;
    let adversarial = ragan_generator_loss(d_real, d_fake)?.mul_scalar(weights.gamma);
    let l1 = mean_l1(x, y)?.mul_scalar(weights.nu);
    texture.add(&adversarial)?.add(&l1)
}
