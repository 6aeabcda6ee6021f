//! The reverse-mode engine: fit a tiny convolutional model with Adam and
//! confirm its gradients by central differences.

use qgac::nn::{check_gradients, conv2d, Adam, AdamConfig, ConvSpec, Coverage, LrSchedule, ParamStore, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qgac::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = ConvSpec::new(1, 1, 3).padding(1);
    // target: a fixed blur kernel
    let truth = Tensor::new(spec.weight_shape(), vec![0.0, 0.1, 0.0, 0.1, 0.6, 0.1, 0.0, 0.1, 0.0])?;
    let x = Tensor::new([4, 1, 12, 12], (0..576).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let y = conv2d(&x, &truth, None, &spec)?;

    let mut params = ParamStore::new();
    params.insert("w", spec.weight_shape(), vec![0.0; 9])?;
    let mut adam = Adam::new(AdamConfig::default());
    let schedule = LrSchedule::Cosine {
        base: 0.05,
        final_lr: 1e-4,
        total: 300,
    };
    for step in 0..300 {
        let grads = {
            let b = params.bind_all();
            let loss = conv2d(&x, &b.get("w")?, None, &spec)?.sub(&y)?.square().mean();
            loss.backward()?;
            if step % 50 == 0 {
                println!("step {step:>3}  mse {:.3e}", loss.item()?);
            }
            b.grads()
        };
        adam.step(&mut params, &grads, schedule.lr_at(step))?;
    }
    println!("learned kernel {:?}", params.get("w").unwrap().data.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>());

    let report = check_gradients(
        |t| Ok(conv2d(&t[0], &t[1], None, &spec)?.softplus().sum()),
        &[([1, 1, 6, 6], (0..36).map(|i| (i as f64 * 0.37).sin()).collect()), (spec.weight_shape(), vec![0.2; 9])],
        1e-5,
        Coverage::All,
    )?;
    println!("finite-difference check: {} entries, max relative error {:.2e}", report.checked, report.max_rel_error);
    Ok(())
}
