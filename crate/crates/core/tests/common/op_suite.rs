//! Every differentiable engine op as a finite-difference case.

use qgac::nn::gradcheck::{check_gradients, Coverage};
use qgac::nn::{self, ConvSpec, Shape, Tensor};
use qgac::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Loss = Box<dyn Fn(&[Tensor]) -> Result<Tensor>>;

pub struct OpCase {
    pub name: &'static str,
    pub build: fn(&mut ChaCha8Rng) -> (Vec<(Shape, Vec<f64>)>, Loss),
}

fn values(rng: &mut ChaCha8Rng, shape: Shape) -> (Shape, Vec<f64>) {
    (shape, (0..shape.iter().product()).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

// bounded away from zero so kinks stay out of the difference stencil
fn away_from_zero(rng: &mut ChaCha8Rng, shape: Shape) -> (Shape, Vec<f64>) {
    let n = shape.iter().product();
    let v = (0..n)
        .map(|_| {
            let m: f64 = rng.gen_range(0.1..1.0);
            if rng.gen() {
                m
            } else {
                -m
            }
        })
        .collect();
    (shape, v)
}

fn small_shape(rng: &mut ChaCha8Rng) -> Shape {
    [rng.gen_range(1..3), rng.gen_range(1..4), rng.gen_range(1..5), rng.gen_range(1..5)]
}

/// `sum(y ⊙ r)` for a fixed random `r`, so every output entry matters.
fn weighted(y: Tensor, seed: u64) -> Result<Tensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = Tensor::new(y.shape(), (0..y.numel()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    Ok(y.mul(&r)?.sum())
}

macro_rules! unary_case {
    ($name:expr, $op:expr) => {
        OpCase {
            name: $name,
            build: |rng| {
                let shape = small_shape(rng);
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted($op(&t[0])?, seed));
                (vec![away_from_zero(rng, shape)], f)
            },
        }
    };
}

macro_rules! binary_case {
    ($name:expr, $op:expr) => {
        OpCase {
            name: $name,
            build: |rng| {
                let shape = small_shape(rng);
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted($op(&t[0], &t[1])?, seed));
                (vec![away_from_zero(rng, shape), away_from_zero(rng, shape)], f)
            },
        }
    };
}

fn conv_case(rng: &mut ChaCha8Rng, transposed: bool) -> (Vec<(Shape, Vec<f64>)>, Loss) {
    let g = [1, 2, 4][rng.gen_range(0..3)];
    let cin = g * rng.gen_range(1..3);
    let cout = g * rng.gen_range(1..3);
    let k = rng.gen_range(1..4);
    let stride = rng.gen_range(1..3);
    let pad = rng.gen_range(0..k);
    let mut spec = ConvSpec::new(cin, cout, k).stride(stride).padding(pad).groups(g);
    // choose an input size the spec tiles exactly
    let (h, w) = if transposed {
        spec = spec.transposed();
        (rng.gen_range(1..4), rng.gen_range(1..4))
    } else {
        let oh = rng.gen_range(1..4);
        let ow = rng.gen_range(1..4);
        (
            ((oh - 1) * stride + k).saturating_sub(2 * pad),
            ((ow - 1) * stride + k).saturating_sub(2 * pad),
        )
    };
    if transposed && spec.output_size(h, w).is_err() {
        return conv_case(rng, transposed);
    }
    if !transposed && (h == 0 || w == 0 || spec.output_size(h, w).is_err()) {
        return conv_case(rng, transposed);
    }
    let n = rng.gen_range(1..3);
    let seed = rng.gen();
    let inputs = vec![
        values(rng, [n, cin, h, w]),
        values(rng, spec.weight_shape()),
        values(rng, [1, cout, 1, 1]),
    ];
    let f: Loss = Box::new(move |t| {
        let y = if spec.transposed {
            nn::conv_transpose2d(&t[0], &t[1], Some(&t[2]), &spec)?
        } else {
            nn::conv2d(&t[0], &t[1], Some(&t[2]), &spec)?
        };
        weighted(y, seed)
    });
    (inputs, f)
}

pub fn cases() -> Vec<OpCase> {
    vec![
        binary_case!("add", |a: &Tensor, b: &Tensor| a.add(b)),
        binary_case!("sub", |a: &Tensor, b: &Tensor| a.sub(b)),
        binary_case!("mul", |a: &Tensor, b: &Tensor| a.mul(b)),
        binary_case!("div", |a: &Tensor, b: &Tensor| a.div(b)),
        unary_case!("add_scalar", |a: &Tensor| Ok::<_, qgac::Error>(a.add_scalar(0.7))),
        unary_case!("mul_scalar", |a: &Tensor| Ok::<_, qgac::Error>(a.mul_scalar(-1.3))),
        unary_case!("abs", |a: &Tensor| Ok::<_, qgac::Error>(a.abs())),
        unary_case!("square", |a: &Tensor| Ok::<_, qgac::Error>(a.square())),
        unary_case!("softplus", |a: &Tensor| Ok::<_, qgac::Error>(a.mul_scalar(3.0).softplus())),
        unary_case!("sum", |a: &Tensor| Ok::<_, qgac::Error>(a.square().sum())),
        unary_case!("mean", |a: &Tensor| Ok::<_, qgac::Error>(a.square().mean())),
        unary_case!("reshape", |a: &Tensor| a.reshape([1, 1, 1, a.numel()])),
        OpCase {
            name: "sub_broadcast",
            build: |rng| {
                let shape = small_shape(rng);
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(t[0].sub_broadcast(&t[1].mean())?, seed));
                let other = small_shape(rng);
                (vec![values(rng, shape), values(rng, other)], f)
            },
        },
        OpCase {
            name: "prelu",
            build: |rng| {
                let shape = small_shape(rng);
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(t[0].prelu(&t[1])?, seed));
                (vec![away_from_zero(rng, shape), values(rng, [1, shape[1], 1, 1])], f)
            },
        },
        OpCase {
            name: "conv2d",
            build: |rng| conv_case(rng, false),
        },
        OpCase {
            name: "conv_transpose2d",
            build: |rng| conv_case(rng, true),
        },
        OpCase {
            name: "concat_channels",
            build: |rng| {
                let [n, _, h, w] = small_shape(rng);
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(nn::concat_channels(&[&t[0], &t[1]])?, seed));
                let (ca, cb) = (rng.gen_range(1..4), rng.gen_range(1..4));
                let a = values(rng, [n, ca, h, w]);
                (vec![a, values(rng, [n, cb, h, w])], f)
            },
        },
        OpCase {
            name: "concat_grouped",
            build: |rng| {
                let [n, _, h, w] = small_shape(rng);
                let g = rng.gen_range(1..4);
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(nn::concat_grouped(&[&t[0], &t[1]], g)?, seed));
                let (ca, cb) = (g * rng.gen_range(1..3), g * rng.gen_range(1..3));
                let a = values(rng, [n, ca, h, w]);
                (vec![a, values(rng, [n, cb, h, w])], f)
            },
        },
        OpCase {
            name: "space_to_depth8",
            build: |rng| {
                let shape = [rng.gen_range(1..3), rng.gen_range(1..3), 8 * rng.gen_range(1..3), 8];
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(nn::space_to_depth8(&t[0])?, seed));
                (vec![values(rng, shape)], f)
            },
        },
        OpCase {
            name: "depth_to_space8",
            build: |rng| {
                let shape = [1, 64 * rng.gen_range(1..3), rng.gen_range(1..3), rng.gen_range(1..3)];
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(nn::depth_to_space8(&t[0])?, seed));
                (vec![values(rng, shape)], f)
            },
        },
        OpCase {
            name: "block_idct",
            build: |rng| {
                let shape = [rng.gen_range(1..3), 1, 8, 8 * rng.gen_range(1..3)];
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(nn::block_idct(&t[0])?, seed));
                (vec![values(rng, shape)], f)
            },
        },
        OpCase {
            name: "block_dct",
            build: |rng| {
                let shape = [1, rng.gen_range(1..3), 8 * rng.gen_range(1..3), 8];
                let seed = rng.gen();
                let f: Loss = Box::new(move |t| weighted(nn::block_dct(&t[0])?, seed));
                (vec![values(rng, shape)], f)
            },
        },
    ]
}

/// Worst relative error of one op over `trials` random shapes and seeds.
pub fn check_case(case: &OpCase, trials: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed * 7919 + case.name.len() as u64);
        let (inputs, f) = (case.build)(&mut rng);
        let report = check_gradients(|t| f(t), &inputs, 1e-5, Coverage::All).unwrap();
        worst = worst.max(report.max_rel_error);
    }
    worst
}
