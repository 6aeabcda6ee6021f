mod common;

use qgac::coeff::{normalize_quant_matrix, NormalizationStats};
use qgac::jpeg::{decode_jpeg_coefficients, decode_jpeg_pixels, encode_jpeg, quality_to_tables, EncodeOptions, Image, Subsampling};
use qgac::model::{
    color_restore, qnorm_tensor, restore_image, y_restore, BlockNet, ColorNet, FrequencyNet, Fusion, ModelCheckpoint,
    NetworkConfig, Qgac, YNet,
};
use qgac::nn::{ParamStore, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(shape: [usize; 4], seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor::new(shape, (0..shape.iter().product()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn toy_params(seed: u64) -> ParamStore {
    Qgac::new(NetworkConfig::toy()).unwrap().init_params(seed).unwrap()
}

/// Replaces every parameter under `prefix` with random values.
fn randomize(store: &mut ParamStore, prefix: &str, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (name, p) in store.iter_mut() {
        if name.starts_with(prefix) {
            p.data.iter_mut().for_each(|v| *v = rng.gen_range(-0.3..0.3));
        }
    }
}

fn set_zero(store: &mut ParamStore, prefix: &str) {
    for (name, p) in store.iter_mut() {
        if name.starts_with(prefix) {
            p.data.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

fn q(quality: u8) -> Tensor {
    qnorm_tensor(&quality_to_tables(quality).unwrap().0)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn blocknet_preserves_shape_and_depends_on_the_table() {
    let cfg = NetworkConfig::toy();
    let net = BlockNet::new("blocknet_pre", &cfg);
    let store = toy_params(1);
    let x = random_tensor([1, 1, 64, 64], 2);
    let b = store.bind_frozen();
    let y10 = net.forward(&b, &x, &q(10)).unwrap();
    let y100 = net.forward(&b, &x, &q(100)).unwrap();
    assert_eq!(y10.shape(), [1, 1, 64, 64]);
    assert!(max_diff(y10.data(), y100.data()) > 0.0);
    assert!(net.forward(&b, &random_tensor([1, 1, 60, 64], 3), &q(10)).is_err());
}

#[test]
fn blocknet_with_zero_tail_outputs_the_bias_map() {
    let cfg = NetworkConfig::toy();
    let net = BlockNet::new("blocknet_pre", &cfg);
    let mut store = toy_params(1);
    set_zero(&mut store, "blocknet_pre.tail.gen2");
    let bias = store.get("blocknet_pre.tail.bias").unwrap().data[0];
    let y = net.forward(&store.bind_frozen(), &random_tensor([1, 1, 32, 32], 2), &q(50)).unwrap();
    assert!(y.data().iter().all(|&v| v.is_finite() && v == bias));
}

fn identity_frequency_convs(store: &mut ParamStore) {
    for conv in ["frequencynet.input", "frequencynet.output"] {
        let w = &mut store.get_mut(&format!("{conv}.weight")).unwrap().data;
        w.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..64 {
            w[(k * 64 + k) * 9 + 4] = 1.0;
        }
        set_zero(store, &format!("{conv}.bias"));
    }
}

#[test]
fn frequency_path_keeps_frequencies_isolated() {
    let cfg = NetworkConfig::toy();
    let net = FrequencyNet::new("frequencynet", &cfg);
    let mut store = toy_params(4);
    randomize(&mut store, "frequencynet.body", 5);
    identity_frequency_convs(&mut store);
    let x = random_tensor([1, 1, 32, 32], 6);
    let base = net.forward(&store.bind_frozen(), &x).unwrap();
    assert_eq!(base.shape(), [1, 1, 32, 32]);
    for (k, block_row, block_col) in [(0, 0, 0), (9, 1, 2), (37, 3, 3), (63, 2, 0)] {
        let mut v = x.to_vec();
        v[(block_row * 8 + k / 8) * 32 + block_col * 8 + k % 8] += 0.5;
        let out = net.forward(&store.bind_frozen(), &Tensor::new([1, 1, 32, 32], v).unwrap()).unwrap();
        let mut changed = false;
        for i in 0..32 * 32 {
            let freq = (i / 32 % 8) * 8 + i % 8;
            let d = out.data()[i] - base.data()[i];
            if freq == k {
                changed |= d != 0.0;
            } else {
                assert_eq!(d, 0.0, "frequency {freq} moved when {k} was perturbed");
            }
        }
        assert!(changed, "frequency {k} had no effect on itself");
    }
}

#[test]
fn zeroed_frequencies_stay_zero_without_biases() {
    let cfg = NetworkConfig::toy();
    let net = FrequencyNet::new("frequencynet", &cfg);
    let mut store = toy_params(4);
    randomize(&mut store, "frequencynet.body", 5);
    identity_frequency_convs(&mut store);
    let names: Vec<String> = store.names().filter(|n| n.ends_with(".bias")).cloned().collect();
    for n in names {
        set_zero(&mut store, &n);
    }
    let mut v = random_tensor([1, 1, 32, 32], 6).to_vec();
    let dead = [5, 40];
    for (i, x) in v.iter_mut().enumerate() {
        if dead.contains(&((i / 32 % 8) * 8 + i % 8)) {
            *x = 0.0;
        }
    }
    let out = net.forward(&store.bind_frozen(), &Tensor::new([1, 1, 32, 32], v).unwrap()).unwrap();
    for (i, y) in out.data().iter().enumerate() {
        if dead.contains(&((i / 32 % 8) * 8 + i % 8)) {
            assert_eq!(*y, 0.0);
        }
    }
}

#[test]
fn frequency_width_not_multiple_of_64_is_a_config_error() {
    let cfg = NetworkConfig {
        freq_width: 96,
        ..NetworkConfig::toy()
    };
    let e = Qgac::new(cfg).unwrap_err();
    assert!(matches!(e, qgac::Error::Config(_)), "{e}");
}

#[test]
fn fusion_laws() {
    let cfg = NetworkConfig::toy();
    let fusion = Fusion::new("fusion", &cfg);
    let mut store = toy_params(7);
    let z = Tensor::zeros([1, 1, 16, 16]);
    let out = fusion.forward(&store.bind_frozen(), &z, &z, &z).unwrap();
    assert!(out.data().iter().all(|&v| v == 0.0));

    randomize(&mut store, "fusion", 8);
    let (a, b, c) = (random_tensor([1, 1, 16, 16], 1), random_tensor([1, 1, 16, 16], 2), random_tensor([1, 1, 16, 16], 3));
    let bind = store.bind_frozen();
    let abc = fusion.forward(&bind, &a, &b, &c).unwrap();
    let cab = fusion.forward(&bind, &c, &a, &b).unwrap();
    assert!(max_diff(abc.data(), cab.data()) > 1e-6);
    assert!(fusion.forward(&bind, &a, &b, &Tensor::zeros([1, 1, 16, 8])).is_err());

    let leaves: Vec<Tensor> = [&a, &b, &c].iter().map(|t| Tensor::leaf(t.shape(), t.to_vec()).unwrap()).collect();
    let y = fusion.forward(&bind, &leaves[0], &leaves[1], &leaves[2]).unwrap();
    y.mul(&random_tensor(y.shape(), 9)).unwrap().sum().backward().unwrap();
    for (i, l) in leaves.iter().enumerate() {
        let g = l.grad().unwrap();
        assert!(g.iter().any(|&v| v != 0.0), "input {i} receives no gradient");
    }
}

#[test]
fn y_network_is_the_identity_at_init() {
    let cfg = NetworkConfig::toy();
    let net = YNet::new(&cfg);
    let store = toy_params(3);
    let x = random_tensor([1, 1, 32, 32], 4);
    let out = net.forward(&store.bind_frozen(), &x, &q(10)).unwrap();
    assert_eq!(out.data(), x.data());
}

#[test]
fn color_network_shapes_and_zero_tail() {
    let cfg = NetworkConfig::toy();
    let net = ColorNet::new(&cfg);
    let store = toy_params(3);
    let b = store.bind_frozen();
    let c = random_tensor([2, 1, 32, 32], 1);
    let y = random_tensor([2, 1, 64, 64], 2);
    let r = net.forward(&b, &c, &y, &q(10), &q(10)).unwrap();
    assert_eq!(r.shape(), [2, 1, 64, 64]);
    assert!(r.data().iter().all(|&v| v == 0.0));
    assert!(net.forward(&b, &c, &random_tensor([2, 1, 48, 64], 2), &q(10), &q(10)).is_err());
}

#[test]
fn chroma_planes_share_weights() {
    let mut ckpt = ModelCheckpoint::initialize(NetworkConfig::toy(), NormalizationStats::identity(), 5).unwrap();
    randomize(&mut ckpt.params, "color_net", 6);
    let img = common::photos().remove(0).1.crop_at(0, 0, 48, 48).unwrap();
    let jpeg = encode_jpeg(&img, &EncodeOptions::new(20, Subsampling::S420)).unwrap();
    let (coeffs, _) = decode_jpeg_coefficients(&jpeg).unwrap();
    let cb = coeffs.cb.as_ref().unwrap();
    let qc = cb.quant;
    let a = color_restore(cb, &coeffs.y, &qc, &coeffs.y.quant, &ckpt).unwrap();
    let b = color_restore(&cb.clone(), &coeffs.y, &qc, &coeffs.y.quant, &ckpt).unwrap();
    assert_eq!((a.width(), a.height()), (coeffs.y.width(), coeffs.y.height()));
    assert_eq!(a, b);
    // batching Cb and Cr together gives the same planes as one at a time
    let cr = coeffs.cr.as_ref().unwrap();
    let both = qgac::model::color_restore_batch(&[cb, cr], &coeffs.y, &qc, &coeffs.y.quant, &ckpt).unwrap();
    assert_eq!(both[0], a);
    assert_eq!(both[1], color_restore(cr, &coeffs.y, &qc, &coeffs.y.quant, &ckpt).unwrap());
}

#[test]
fn y_restore_is_finite_and_near_identity_at_init() {
    let ckpt = ModelCheckpoint::initialize(NetworkConfig::toy(), NormalizationStats::identity(), 5).unwrap();
    let img = common::photos().remove(1).1.crop_at(0, 0, 64, 64).unwrap();
    for quality in [10, 50, 100] {
        let jpeg = encode_jpeg(&img, &EncodeOptions::new(quality, Subsampling::S420)).unwrap();
        let (coeffs, _) = decode_jpeg_coefficients(&jpeg).unwrap();
        let out = y_restore(&coeffs.y, &coeffs.y.quant, &ckpt).unwrap();
        assert!(out.values.iter().all(|v| v.is_finite()));
        assert!(max_diff(&out.values, &coeffs.y.values) < 1e-9);
    }
}

fn restore_matches_decoder(img: &Image, ckpt: &ModelCheckpoint, quality: u8, subsampling: Subsampling) {
    let jpeg = encode_jpeg(img, &EncodeOptions::new(quality, subsampling)).unwrap();
    let restored = restore_image(&jpeg, ckpt).unwrap();
    let decoded = decode_jpeg_pixels(&jpeg).unwrap();
    assert_eq!((restored.width(), restored.height(), restored.channels()), (img.width(), img.height(), img.channels()));
    let d = common::max_abs_diff(&restored.to_interleaved(), &decoded.to_interleaved());
    assert!(d <= 1, "q{quality} {subsampling}: max diff {d}");
}

#[test]
fn untrained_restoration_reproduces_the_decoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let stats = NormalizationStats {
        luma: qgac::coeff::FrequencyStats::new(
            qgac::jpeg::ChannelRole::Luma,
            std::array::from_fn(|_| rng.gen_range(-5.0..5.0)),
            std::array::from_fn(|_| rng.gen_range(1.0..30.0)),
        )
        .unwrap(),
        chroma: qgac::coeff::FrequencyStats::new(
            qgac::jpeg::ChannelRole::Chroma,
            std::array::from_fn(|_| rng.gen_range(-5.0..5.0)),
            std::array::from_fn(|_| rng.gen_range(1.0..30.0)),
        )
        .unwrap(),
    };
    let ckpt = ModelCheckpoint::initialize(NetworkConfig::toy(), stats, 11).unwrap();
    let img = common::photos().remove(2).1.crop_at(3, 5, 61, 45).unwrap();
    for quality in [10, 50, 100] {
        restore_matches_decoder(&img, &ckpt, quality, Subsampling::S420);
    }
    restore_matches_decoder(&img, &ckpt, 30, Subsampling::S444);
    let gray = Image::gray(img.plane(1).clone());
    restore_matches_decoder(&gray, &ckpt, 30, Subsampling::S420);
}

#[test]
fn qnorm_tensor_matches_the_normalized_table() {
    let t = quality_to_tables(50).unwrap().0;
    assert_eq!(qnorm_tensor(&t).data(), &normalize_quant_matrix(&t)[..]);
    assert_eq!(qnorm_tensor(&t).data()[0], 16.0 / 255.0);
}

#[test]
fn loss_gradients_reach_every_subnetwork() {
    for (sub, err) in common::model_grad::subnetwork_gradcheck(1, 10) {
        assert!(err < 1e-3, "{sub}: relative error {err:e}");
    }
}
