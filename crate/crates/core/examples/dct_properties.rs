//! Orthonormal 8×8 DCT: round trip, energy preservation, basis images.

use qgac::jpeg::{dct_forward_block, dct_inverse_block};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_trip, mut worst_energy) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let x: [f64; 64] = std::array::from_fn(|_| rng.gen_range(-128.0..128.0));
        let d = dct_forward_block(&x);
        let back = dct_inverse_block(&d);
        worst_trip = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(worst_trip, f64::max);
        let e1: f64 = x.iter().map(|v| v * v).sum();
        let e2: f64 = d.iter().map(|v| v * v).sum();
        worst_energy = worst_energy.max((e1 - e2).abs() / e1);
    }
    println!("10000 random blocks: max round-trip error {worst_trip:.2e}, max relative energy error {worst_energy:.2e}");

    let mut impulse = [0.0; 64];
    impulse[8 + 1] = 1.0;
    let basis = dct_inverse_block(&impulse);
    println!("basis image for frequency (1, 1):");
    for row in basis.chunks(8) {
        println!("  {}", row.iter().map(|v| format!("{v:+.3}")).collect::<Vec<_>>().join(" "));
    }
}
