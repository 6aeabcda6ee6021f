//! The block networks generate their 8×8 kernels from the quantization
//! table, so the same coefficients are treated differently per quality.

use qgac::coeff::NormalizationStats;
use qgac::jpeg::{quality_to_tables, CoefficientPlane};
use qgac::model::{planes_to_tensor, qnorm_tensor, ModelCheckpoint, NetworkConfig};
use qgac::nn::Tensor;

fn main() -> qgac::error::Result<()> {
    let ckpt = ModelCheckpoint::initialize(NetworkConfig::toy(), NormalizationStats::identity(), 1)?;
    let model = ckpt.model()?;
    let b = ckpt.params.bind_frozen();
    let (q50, _) = quality_to_tables(50)?;
    let mut plane = CoefficientPlane::zeros(2, 2, q50);
    plane.values.iter_mut().enumerate().for_each(|(i, v)| *v = ((i * 7919) % 13) as f64 / 6.0 - 1.0);
    let x = planes_to_tensor(&[&plane])?;
    let mut previous: Option<Tensor> = None;
    for q in [10, 50, 90] {
        let (luma, _) = quality_to_tables(q)?;
        let out = model.y.pre.forward(&b, &x, &qnorm_tensor(&luma))?;
        let v = out.to_vec();
        let energy = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let change = previous.map(|p| p.to_vec().iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        println!("q{q:<3} pre-block output norm {energy:.4}  max change from previous quality {change:?}");
        previous = Some(out);
    }
    println!("parameters: {} tensors, {} scalars", ckpt.params.len(), ckpt.params.count());
    Ok(())
}
