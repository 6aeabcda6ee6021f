//! Channel concatenation, frequency rearrangement and blockwise DCTs as
//! differentiable permutations and linear maps.

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::jpeg::{dct_forward_block, dct_inverse_block};

/// Applies an index permutation: `out[i] = x[src[i]]`.
fn permute(x: &Tensor, shape: [usize; 4], src: Vec<usize>) -> Tensor {
    let data = src.iter().map(|&i| x.data()[i]).collect();
    let parents = vec![x.clone()];
    let n = x.numel();
    Tensor::from_op(shape, data, parents, move |g| {
        let mut gx = vec![0.0; n];
        for (o, &i) in src.iter().enumerate() {
            gx[i] += g[o];
        }
        vec![Some(gx)]
    })
}

fn check_concat(parts: &[&Tensor], groups: usize) -> Result<[usize; 4]> {
    let first = parts.first().ok_or_else(|| Error::domain("concat of nothing"))?.shape();
    let mut c = 0;
    for p in parts {
        let [n, pc, h, w] = p.shape();
        if (n, h, w) != (first[0], first[2], first[3]) {
            return Err(Error::domain(format!(
                "concat: shape {:?} does not match {:?} outside the channel axis",
                p.shape(),
                first
            )));
        }
        if pc % groups != 0 {
            return Err(Error::domain(format!("concat: {pc} channels not divisible by {groups} groups")));
        }
        c += pc;
    }
    Ok([first[0], c, first[2], first[3]])
}

/// Concatenation along channels, in argument order.
pub fn concat_channels(parts: &[&Tensor]) -> Result<Tensor> {
    concat_grouped(parts, 1)
}

/// Concatenation that keeps group structure: the output holds, for each of the
/// `groups` channel groups in turn, that group's slice of every part. A grouped
/// convolution over the result then sees only matching groups of its inputs.
pub fn concat_grouped(parts: &[&Tensor], groups: usize) -> Result<Tensor> {
    let shape = check_concat(parts, groups)?;
    let [n, c, h, w] = shape;
    let hw = h * w;
    // flatten all parts into one buffer so a single permutation handles the gradient
    let offsets: Vec<usize> = parts
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.numel();
            Some(o)
        })
        .collect();
    let mut src = Vec::with_capacity(n * c * hw);
    for b in 0..n {
        for g in 0..groups {
            for (p, &off) in parts.iter().zip(&offsets) {
                let pc = p.shape()[1];
                let per = pc / groups;
                for ch in g * per..(g + 1) * per {
                    let base = off + (b * pc + ch) * hw;
                    src.extend(base..base + hw);
                }
            }
        }
    }
    let data: Vec<f64> = src
        .iter()
        .map(|&i| {
            let k = offsets.partition_point(|&o| o <= i) - 1;
            parts[k].data()[i - offsets[k]]
        })
        .collect();
    let parent_list: Vec<Tensor> = parts.iter().map(|&p| p.clone()).collect();
    let sizes: Vec<usize> = parts.iter().map(|p| p.numel()).collect();
    let total: usize = sizes.iter().sum();
    Ok(Tensor::from_op(shape, data, parent_list, move |g| {
        let mut flat = vec![0.0; total];
        for (o, &i) in src.iter().enumerate() {
            flat[i] += g[o];
        }
        let mut out = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in &sizes {
            out.push(Some(flat[start..start + s].to_vec()));
            start += s;
        }
        out
    }))
}

/// `(N, C, H, W) -> (N, 64C, H/8, W/8)`; channel `64c + 8i + j` holds
/// frequency `(i, j)` of every 8×8 block of input channel `c`.
pub fn space_to_depth8(x: &Tensor) -> Result<Tensor> {
    let [n, c, h, w] = x.shape();
    if h % 8 != 0 || w % 8 != 0 {
        return Err(Error::domain(format!("space_to_depth: {h}x{w} is not a multiple of 8")));
    }
    let (bh, bw) = (h / 8, w / 8);
    let mut src = Vec::with_capacity(x.numel());
    for b in 0..n {
        for ch in 0..c {
            for k in 0..64 {
                for r in 0..bh {
                    for col in 0..bw {
                        src.push(((b * c + ch) * h + r * 8 + k / 8) * w + col * 8 + k % 8);
                    }
                }
            }
        }
    }
    Ok(permute(x, [n, c * 64, bh, bw], src))
}

/// Inverse of [`space_to_depth8`].
pub fn depth_to_space8(x: &Tensor) -> Result<Tensor> {
    let [n, c64, bh, bw] = x.shape();
    if c64 % 64 != 0 {
        return Err(Error::domain(format!("depth_to_space: {c64} channels is not a multiple of 64")));
    }
    let c = c64 / 64;
    let (h, w) = (bh * 8, bw * 8);
    let mut src = Vec::with_capacity(x.numel());
    for b in 0..n {
        for ch in 0..c {
            for y in 0..h {
                for xx in 0..w {
                    let k = (y % 8) * 8 + xx % 8;
                    src.push(((b * c64 + ch * 64 + k) * bh + y / 8) * bw + xx / 8);
                }
            }
        }
    }
    Ok(permute(x, [n, c, h, w], src))
}

fn blockwise(x: &[f64], shape: [usize; 4], f: fn(&[f64; 64]) -> [f64; 64]) -> Vec<f64> {
    let [n, c, h, w] = shape;
    let mut out = vec![0.0; x.len()];
    for plane in 0..n * c {
        let base = plane * h * w;
        for r in 0..h / 8 {
            for col in 0..w / 8 {
                let block: [f64; 64] = std::array::from_fn(|i| x[base + (r * 8 + i / 8) * w + col * 8 + i % 8]);
                let y = f(&block);
                for i in 0..64 {
                    out[base + (r * 8 + i / 8) * w + col * 8 + i % 8] = y[i];
                }
            }
        }
    }
    out
}

fn block_transform(x: &Tensor, fwd: fn(&[f64; 64]) -> [f64; 64], adj: fn(&[f64; 64]) -> [f64; 64]) -> Result<Tensor> {
    let shape = x.shape();
    if shape[2] % 8 != 0 || shape[3] % 8 != 0 {
        return Err(Error::domain(format!("block transform on {shape:?}: spatial dims must be multiples of 8")));
    }
    let data = blockwise(x.data(), shape, fwd);
    Ok(Tensor::from_op(shape, data, vec![x.clone()], move |g| vec![Some(blockwise(g, shape, adj))]))
}

/// Inverse DCT of every 8×8 block (coefficients laid out spatially).
/// The transform is orthonormal, so its adjoint is the forward DCT.
pub fn block_idct(x: &Tensor) -> Result<Tensor> {
    block_transform(x, dct_inverse_block, dct_forward_block)
}

pub fn block_dct(x: &Tensor) -> Result<Tensor> {
    block_transform(x, dct_forward_block, dct_inverse_block)
}
