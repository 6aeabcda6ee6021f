//! Grouped, strided and transposed convolutions: shapes, the adjoint
//! identity <conv(x), y> = <x, convT(y)>, and group isolation.

use qgac::nn::{conv2d, conv_transpose2d, ConvSpec, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, shape: [usize; 4]) -> qgac::error::Result<Tensor> {
    Tensor::new(shape, (0..shape.iter().product()).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| x * y).sum()
}

fn main() -> qgac::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = ConvSpec::new(4, 6, 3).stride(2).padding(1).groups(2);
    let w = random(&mut rng, spec.weight_shape())?;
    let x = random(&mut rng, [1, 4, 9, 9])?;
    let y = conv2d(&x, &w, None, &spec)?;
    println!("conv2d {:?} -> {:?} (weight {:?})", x.shape(), y.shape(), w.shape());

    // the adjoint runs 6 -> 4 channels with the same weight tensor
    let back = ConvSpec::new(6, 4, 3).stride(2).padding(1).groups(2).transposed();
    assert_eq!(back.weight_shape(), spec.weight_shape());
    let t = conv_transpose2d(&y, &w, None, &back)?;
    println!("conv_transpose2d {:?} -> {:?}", y.shape(), t.shape());
    let probe = random(&mut rng, y.shape())?;
    let lhs = dot(&conv2d(&x, &w, None, &spec)?, &probe);
    let rhs = dot(&x, &conv_transpose2d(&probe, &w, None, &back)?);
    println!("adjoint identity: {lhs:.12} vs {rhs:.12}");

    // zeroing the first group's input leaves the second group's output alone
    let mut xd = x.to_vec();
    xd[..2 * 81].iter_mut().for_each(|v| *v = 0.0);
    let y2 = conv2d(&Tensor::new([1, 4, 9, 9], xd)?, &w, None, &spec)?;
    let n = 25 * 3;
    println!("second-group outputs unchanged: {}", y.to_vec()[n..] == y2.to_vec()[n..]);

    // the 8x8 stride-8 case used on DCT blocks
    let blocks = ConvSpec::new(1, 16, 8).stride(8);
    let out = conv2d(&random(&mut rng, [2, 1, 32, 24])?, &random(&mut rng, blocks.weight_shape())?, None, &blocks)?;
    println!("block conv {:?}", out.shape());
    Ok(())
}
