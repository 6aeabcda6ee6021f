//! Randomized quantized images for entropy-coding round trips.

use qgac::jpeg::{quality_to_tables, CoefficientBlock, QuantizedImage, QuantizedPlane, Subsampling};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    Zero,
    /// Every coefficient at a codable extreme: DC in {-1024, 1023}, AC ±1023.
    Extreme,
    Sparse,
    Dense,
}

fn block(rng: &mut ChaCha8Rng, fill: Fill) -> CoefficientBlock {
    let mut b = CoefficientBlock::default();
    match fill {
        Fill::Zero => {}
        Fill::Extreme => {
            b.0[0] = if rng.gen() { 1023 } else { -1024 };
            b.0[1..].iter_mut().for_each(|v| *v = if rng.gen() { 1023 } else { -1023 });
        }
        Fill::Sparse => {
            for _ in 0..rng.gen_range(0..6) {
                let k = rng.gen_range(0..64);
                b.0[k] = rng.gen_range(if k == 0 { -1024 } else { -1023 }..=1023);
            }
        }
        Fill::Dense => b.0.iter_mut().for_each(|v| *v = rng.gen_range(-40..=40)),
    }
    b
}

fn plane(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fill: Fill, quality: u8, chroma: bool) -> QuantizedPlane {
    let (l, c) = quality_to_tables(quality).unwrap();
    QuantizedPlane {
        block_rows: rows,
        block_cols: cols,
        blocks: (0..rows * cols).map(|_| block(rng, fill)).collect(),
        quant: if chroma { c } else { l },
    }
}

/// A random image: layout (gray, 4:4:4, 4:2:0), size and fill from `seed`.
/// `single_block` forces the smallest image of its layout.
pub fn random_image(seed: u64, fill: Fill, single_block: bool) -> QuantizedImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = rng.gen_range(0..3);
    let (w, h) = if single_block {
        (rng.gen_range(1..=8), rng.gen_range(1..=8))
    } else {
        (rng.gen_range(1..=70), rng.gen_range(1..=70))
    };
    let quality = rng.gen_range(1..=100);
    let up = |v: usize, m: usize| v.div_ceil(m);
    let (y, cb, cr, subsampling) = match layout {
        0 => (plane(&mut rng, up(h, 8), up(w, 8), fill, quality, false), None, None, Subsampling::S444),
        1 => {
            let (r, c) = (up(h, 8), up(w, 8));
            let y = plane(&mut rng, r, c, fill, quality, false);
            let cb = plane(&mut rng, r, c, fill, quality, true);
            let cr = plane(&mut rng, r, c, fill, quality, true);
            (y, Some(cb), Some(cr), Subsampling::S444)
        }
        _ => {
            let (r, c) = (up(h, 16), up(w, 16));
            let y = plane(&mut rng, 2 * r, 2 * c, fill, quality, false);
            let cb = plane(&mut rng, r, c, fill, quality, true);
            let cr = plane(&mut rng, r, c, fill, quality, true);
            (y, Some(cb), Some(cr), Subsampling::S420)
        }
    };
    QuantizedImage {
        y,
        cb,
        cr,
        subsampling,
        width: w,
        height: h,
    }
}

/// The first four seeds are the named edge cases, the rest mix fills.
pub fn corpus_case(i: u64) -> QuantizedImage {
    match i {
        0 => random_image(i, Fill::Zero, false),
        1 => random_image(i, Fill::Extreme, false),
        2 => random_image(i, Fill::Sparse, true),
        3 => random_image(i, Fill::Extreme, true),
        _ => {
            let fill = [Fill::Zero, Fill::Extreme, Fill::Sparse, Fill::Dense][(i % 4) as usize];
            random_image(i, fill, i % 7 == 0)
        }
    }
}
