//! Orthonormal 8×8 DCT-II / DCT-III in double precision.

use std::sync::OnceLock;

/// `basis()[u][x] = C(u)/2 · cos((2x+1)uπ/16)`; rows are orthonormal.
pub fn basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; 8]; 8];
        for (u, row) in m.iter_mut().enumerate() {
            let cu = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = 0.5 * cu * (((2 * x + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        m
    })
}

/// Forward transform of a block of (already centred) samples, raster order.
pub fn dct_forward_block(pixels: &[f64; 64]) -> [f64; 64] {
    let a = basis();
    // rows: tmp[y][v] = Σ_x a[v][x] p[y][x]
    let mut tmp = [0.0; 64];
    for y in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for x in 0..8 {
                s += a[v][x] * pixels[y * 8 + x];
            }
            tmp[y * 8 + v] = s;
        }
    }
    let mut out = [0.0; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for y in 0..8 {
                s += a[u][y] * tmp[y * 8 + v];
            }
            out[u * 8 + v] = s;
        }
    }
    out
}

pub fn dct_inverse_block(coeffs: &[f64; 64]) -> [f64; 64] {
    let a = basis();
    // tmp[y][v] = Σ_u a[u][y] c[u][v]
    let mut tmp = [0.0; 64];
    for y in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for u in 0..8 {
                s += a[u][y] * coeffs[u * 8 + v];
            }
            tmp[y * 8 + v] = s;
        }
    }
    let mut out = [0.0; 64];
    for y in 0..8 {
        for x in 0..8 {
            let mut s = 0.0;
            for v in 0..8 {
                s += a[v][x] * tmp[y * 8 + v];
            }
            out[y * 8 + x] = s;
        }
    }
    out
}
