//! Regression and GAN objectives on small tensors.

use qgac::losses::{gan_total_loss, l_jpeg, l_jpeg_shifted, ragan_generator_loss, LossWeights, RandomConvExtractor};
use qgac::nn::Tensor;

fn image(seed: f64) -> qgac::error::Result<Tensor> {
    Tensor::new([1, 1, 16, 16], (0..256).map(|i| 0.5 + 0.4 * ((i as f64) * 0.13 + seed).sin()).collect())
}

fn main() -> qgac::error::Result<()> {
    let (x, y) = (image(0.0)?, image(0.3)?);
    println!("l_jpeg(x, x)         = {}", l_jpeg(&x, &x, 0.05)?.item()?);
    println!("l_jpeg(x, y)         = {:.6}", l_jpeg(&x, &y, 0.05)?.item()?);
    println!("shifted l_jpeg(x, y) = {:.6}", l_jpeg_shifted(&x, &y, 0.05)?.item()?);

    let equal = Tensor::new([1, 1, 1, 4], vec![0.3; 4])?;
    println!("RaGAN at equal scores = {:.6} (2 ln 2 = {:.6})", ragan_generator_loss(&equal, &equal)?.item()?, 2.0 * 2f64.ln());
    let real = Tensor::new([1, 1, 1, 4], vec![-5.0; 4])?;
    let fake = Tensor::new([1, 1, 1, 4], vec![5.0; 4])?;
    println!("RaGAN when fakes win  = {:.3e}", ragan_generator_loss(&real, &fake)?.item()?);

    let features = RandomConvExtractor::new(1, &[4, 4], 0)?;
    let w = LossWeights::default();
    println!("weights {w:?}");
    println!("GAN total = {:.6}", gan_total_loss(&x, &y, &real, &fake, &features, &w)?.item()?);
    Ok(())
}
