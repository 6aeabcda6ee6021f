//! Finite-difference spot checks of the regression loss with respect to
//! network parameters, on the toy config at 16×16.

use std::collections::BTreeMap;

use qgac::coeff::{FrequencyStats, NormalizationStats};
use qgac::jpeg::{quality_to_tables, ChannelRole};
use qgac::losses::{coefficients_to_unit_pixels, l_jpeg};
use qgac::model::{denormalize_tensor, qnorm_tensor, subnetwork_of, ModelCheckpoint, NetworkConfig, SUBNETWORKS};
use qgac::nn::gradcheck::relative_error;
use qgac::nn::{ParamStore, Tensor};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Problem {
    ckpt: ModelCheckpoint,
    y_in: Tensor,
    y_target: Tensor,
    c_in: Tensor,
    luma_guide: Tensor,
    c_target: Tensor,
}

fn tensor(rng: &mut ChaCha8Rng, shape: [usize; 4], lo: f64, hi: f64) -> Tensor {
    Tensor::new(shape, (0..shape.iter().product()).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

fn problem(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = |role| {
        let mean = std::array::from_fn(|k| if k == 0 { rng.gen_range(-40.0..40.0) } else { 0.0 });
        let std = std::array::from_fn(|k| 60.0 / (1.0 + k as f64).sqrt());
        FrequencyStats::new(role, mean, std).unwrap()
    };
    let stats = NormalizationStats {
        luma: stats(ChannelRole::Luma),
        chroma: stats(ChannelRole::Chroma),
    };
    let mut ckpt = ModelCheckpoint::initialize(NetworkConfig::toy(), stats, seed).unwrap();
    // the zero-initialized tails would hide every upstream gradient
    for (name, p) in ckpt.params.iter_mut() {
        if name.starts_with("fusion.conv2") || name.starts_with("color_net.tail.gen2") || name == "color_net.tail.bias" {
            p.data.iter_mut().for_each(|v| *v = rng.gen_range(-0.2..0.2));
        }
    }
    Problem {
        y_in: tensor(&mut rng, [1, 1, 16, 16], -1.0, 1.0),
        y_target: tensor(&mut rng, [1, 1, 16, 16], 0.0, 1.0),
        c_in: tensor(&mut rng, [1, 1, 8, 8], -1.0, 1.0),
        luma_guide: tensor(&mut rng, [1, 1, 16, 16], -1.0, 1.0),
        c_target: tensor(&mut rng, [1, 1, 16, 16], 0.0, 1.0),
        ckpt,
    }
}

fn loss(p: &Problem, params: &ParamStore, trainable: bool) -> (f64, BTreeMap<String, Vec<f64>>) {
    let model = p.ckpt.model().unwrap();
    let (ql, qc) = quality_to_tables(30).unwrap();
    let b = if trainable { params.bind_all() } else { params.bind_frozen() };
    let y = model.y.forward(&b, &p.y_in, &qnorm_tensor(&ql)).unwrap();
    let y_px = coefficients_to_unit_pixels(&denormalize_tensor(&y, &p.ckpt.stats.luma).unwrap()).unwrap();
    let ly = l_jpeg(&y_px, &p.y_target, 0.05).unwrap();
    let r = model.color.forward(&b, &p.c_in, &p.luma_guide, &qnorm_tensor(&qc), &qnorm_tensor(&ql)).unwrap();
    let c_px = coefficients_to_unit_pixels(&denormalize_tensor(&r, &p.ckpt.stats.chroma).unwrap()).unwrap();
    let lc = l_jpeg(&c_px, &p.c_target, 0.05).unwrap();
    let total = ly.add(&lc).unwrap();
    if trainable {
        total.backward().unwrap();
    }
    (total.item().unwrap(), b.grads())
}

/// Worst relative error per subnetwork over `per_subnet` random scalar parameters.
pub fn subnetwork_gradcheck(seed: u64, per_subnet: usize) -> BTreeMap<String, f64> {
    let p = problem(seed);
    let (_, grads) = loss(&p, &p.ckpt.params, true);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out = BTreeMap::new();
    let h = 1e-6;
    for sub in SUBNETWORKS {
        let names: Vec<&String> = p.ckpt.params.names().filter(|n| subnetwork_of(n) == sub).collect();
        let mut worst: f64 = 0.0;
        for _ in 0..per_subnet {
            let name = names.choose(&mut rng).unwrap().as_str();
            let i = rng.gen_range(0..p.ckpt.params.get(name).unwrap().data.len());
            let mut params = p.ckpt.params.clone();
            let x0 = params.get(name).unwrap().data[i];
            params.get_mut(name).unwrap().data[i] = x0 + h;
            let plus = loss(&p, &params, false).0;
            params.get_mut(name).unwrap().data[i] = x0 - h;
            let minus = loss(&p, &params, false).0;
            let numeric = (plus - minus) / (2.0 * h);
            let analytic = grads.get(name).map_or(0.0, |g| g[i]);
            worst = worst.max(relative_error(analytic, numeric));
        }
        out.insert(sub.to_string(), worst);
    }
    out
}
