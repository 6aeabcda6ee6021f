//! Building blocks declared once and used twice: to list parameters (names,
//! shapes, initializers) and to run the forward pass against bound leaves.

use rand::Rng;

use crate::error::Result;
use crate::nn::init::{bias_uniform, kaiming_uniform, PRELU_INIT};
use crate::nn::{concat_grouped, conv2d, conv_transpose2d, Bindings, ConvSpec, Shape, Tensor};

/// Dense-block convolutions start at this fraction of the Kaiming scale.
pub const DENSE_INIT_SCALE: f64 = 0.1;
/// Residual scale inside and around every dense block.
pub const RESIDUAL_BETA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Kaiming-uniform for the given fan-in, multiplied by `scale`.
    Kaiming { fan_in: usize, scale: f64 },
    /// Uniform in ±1/sqrt(fan_in).
    Bias { fan_in: usize },
    Zeros,
    Constant(f64),
}

impl Init {
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        match *self {
            Init::Kaiming { fan_in, scale } => kaiming_uniform(rng, fan_in, count).into_iter().map(|v| v * scale).collect(),
            Init::Bias { fan_in } => bias_uniform(rng, fan_in, count),
            Init::Zeros => vec![0.0; count],
            Init::Constant(c) => vec![c; count],
        }
    }
}

/// One row of the architecture table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Shape,
    pub init: Init,
}

pub(crate) type Table = Vec<ParamSpec>;

fn push(t: &mut Table, name: String, shape: Shape, init: Init) {
    t.push(ParamSpec { name, shape, init });
}

/// Effective fan-in of one output unit, also for transposed convolutions.
fn effective_fan_in(spec: &ConvSpec) -> usize {
    if spec.transposed {
        (spec.fan_in() / (spec.stride * spec.stride)).max(1)
    } else {
        spec.fan_in()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Conv {
    pub name: String,
    pub spec: ConvSpec,
    /// Weight scale relative to Kaiming; 0 zero-initializes weight and bias.
    pub scale: f64,
}

impl Conv {
    pub fn new(name: impl Into<String>, spec: ConvSpec, scale: f64) -> Self {
        Self {
            name: name.into(),
            spec,
            scale,
        }
    }

    pub fn declare(&self, t: &mut Table) {
        let fan_in = effective_fan_in(&self.spec);
        let (w, b) = if self.scale == 0.0 {
            (Init::Zeros, Init::Zeros)
        } else {
            (Init::Kaiming { fan_in, scale: self.scale }, Init::Bias { fan_in })
        };
        push(t, format!("{}.weight", self.name), self.spec.weight_shape(), w);
        push(t, format!("{}.bias", self.name), [1, self.spec.out_channels, 1, 1], b);
    }

    pub fn forward(&self, b: &Bindings, x: &Tensor) -> Result<Tensor> {
        let w = b.get(&format!("{}.weight", self.name))?;
        let bias = b.get(&format!("{}.bias", self.name))?;
        if self.spec.transposed {
            conv_transpose2d(x, &w, Some(&bias), &self.spec)
        } else {
            conv2d(x, &w, Some(&bias), &self.spec)
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Prelu {
    pub name: String,
    pub channels: usize,
}

impl Prelu {
    pub fn new(name: impl Into<String>, channels: usize) -> Self {
        Self {
            name: name.into(),
            channels,
        }
    }

    pub fn declare(&self, t: &mut Table) {
        push(t, format!("{}.slope", self.name), [1, self.channels, 1, 1], Init::Constant(PRELU_INIT));
    }

    pub fn forward(&self, b: &Bindings, x: &Tensor) -> Result<Tensor> {
        x.prelu(&b.get(&format!("{}.slope", self.name))?)
    }
}

fn conv3(name: String, cin: usize, cout: usize, groups: usize, scale: f64) -> Conv {
    Conv::new(name, ConvSpec::new(cin, cout, 3).padding(1).groups(groups), scale)
}

/// Convolutional filter manifold: a three-layer CNN maps the normalized
/// quantization matrix (1×1×8×8) to the weight of an 8×8 stride-8
/// convolution (or its transpose), plus a free bias.
#[derive(Debug, Clone)]
pub(crate) struct Cfm {
    pub name: String,
    pub cin: usize,
    pub cout: usize,
    pub transposed: bool,
    generator: [Conv; 3],
    acts: [Prelu; 2],
    zero_tail: bool,
}

impl Cfm {
    pub fn new(name: impl Into<String>, cin: usize, cout: usize, transposed: bool, hidden: [usize; 2], zero_tail: bool) -> Self {
        let name = name.into();
        let [h0, h1] = hidden;
        let last_scale = if zero_tail { 0.0 } else { 1.0 };
        Self {
            generator: [
                conv3(format!("{name}.gen0"), 1, h0, 1, 1.0),
                conv3(format!("{name}.gen1"), h0, h1, 1, 1.0),
                conv3(format!("{name}.gen2"), h1, cin * cout, 1, last_scale),
            ],
            acts: [Prelu::new(format!("{name}.act0"), h0), Prelu::new(format!("{name}.act1"), h1)],
            name,
            cin,
            cout,
            transposed,
            zero_tail,
        }
    }

    pub fn target_spec(&self) -> ConvSpec {
        let s = ConvSpec::new(self.cin, self.cout, 8).stride(8);
        if self.transposed {
            s.transposed()
        } else {
            s
        }
    }

    fn fan_in(&self) -> usize {
        effective_fan_in(&self.target_spec())
    }

    pub fn declare(&self, t: &mut Table) {
        self.generator[0].declare(t);
        self.acts[0].declare(t);
        self.generator[1].declare(t);
        self.acts[1].declare(t);
        self.generator[2].declare(t);
        let init = if self.zero_tail {
            Init::Zeros
        } else {
            Init::Bias { fan_in: self.fan_in() }
        };
        push(t, format!("{}.bias", self.name), [1, self.cout, 1, 1], init);
    }

    /// The generated weight, in the layout of [`Cfm::target_spec`].
    pub fn kernel(&self, b: &Bindings, qnorm: &Tensor) -> Result<Tensor> {
        let h = self.acts[0].forward(b, &self.generator[0].forward(b, qnorm)?)?;
        let h = self.acts[1].forward(b, &self.generator[1].forward(b, &h)?)?;
        let raw = self.generator[2].forward(b, &h)?;
        // channel index o·cin+i for convolutions, i·cout+o for transposes: both a plain reshape
        let shape = self.target_spec().weight_shape();
        Ok(raw.reshape(shape)?.mul_scalar(1.0 / (self.fan_in() as f64).sqrt()))
    }

    pub fn forward(&self, b: &Bindings, x: &Tensor, qnorm: &Tensor) -> Result<Tensor> {
        let w = self.kernel(b, qnorm)?;
        let bias = b.get(&format!("{}.bias", self.name))?;
        let spec = self.target_spec();
        if self.transposed {
            conv_transpose2d(x, &w, Some(&bias), &spec)
        } else {
            conv2d(x, &w, Some(&bias), &spec)
        }
    }
}

/// Residual-in-residual dense block: three dense blocks of five 3×3
/// convolutions. With `groups > 1` every convolution and concatenation keeps
/// channel groups separate.
#[derive(Debug, Clone)]
pub(crate) struct Rrdb {
    dense: Vec<(Vec<Conv>, Vec<Prelu>)>,
    groups: usize,
}

impl Rrdb {
    pub fn new(name: &str, channels: usize, growth: usize, groups: usize) -> Self {
        let dense = (0..3)
            .map(|d| {
                let convs = (0..5)
                    .map(|i| {
                        let out = if i < 4 { growth } else { channels };
                        conv3(format!("{name}.dense{d}.conv{i}"), channels + i * growth, out, groups, DENSE_INIT_SCALE)
                    })
                    .collect();
                let acts = (0..4).map(|i| Prelu::new(format!("{name}.dense{d}.act{i}"), growth)).collect();
                (convs, acts)
            })
            .collect();
        Self { dense, groups }
    }

    #[cfg(test)]
    pub fn conv_count(&self) -> usize {
        self.dense.iter().map(|(c, _)| c.len()).sum()
    }

    pub fn declare(&self, t: &mut Table) {
        for (convs, acts) in &self.dense {
            for (i, c) in convs.iter().enumerate() {
                c.declare(t);
                if let Some(a) = acts.get(i) {
                    a.declare(t);
                }
            }
        }
    }

    pub fn forward(&self, b: &Bindings, x: &Tensor) -> Result<Tensor> {
        let mut h = x.clone();
        for (convs, acts) in &self.dense {
            let mut feats = vec![h.clone()];
            for (i, conv) in convs.iter().enumerate() {
                let refs: Vec<&Tensor> = feats.iter().collect();
                let input = concat_grouped(&refs, self.groups)?;
                let y = conv.forward(b, &input)?;
                if i < 4 {
                    feats.push(acts[i].forward(b, &y)?);
                } else {
                    h = h.add(&y.mul_scalar(RESIDUAL_BETA))?;
                }
            }
        }
        x.add(&h.mul_scalar(RESIDUAL_BETA))
    }
}
