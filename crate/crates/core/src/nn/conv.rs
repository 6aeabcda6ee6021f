//! Grouped, strided, padded 2-D convolution and its transpose.
//!
//! Weight layouts follow the usual convention: `(C_out, C_in / groups, kh, kw)`
//! for convolution and `(C_in, C_out / groups, kh, kw)` for the transpose.
//! Groups partition channels contiguously. Summation order is a fixed loop
//! nest; batch items may run on separate threads with their own buffers.

use rayon::prelude::*;

use super::tensor::{Shape, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride: usize,
    pub padding: usize,
    pub groups: usize,
    pub transposed: bool,
}

impl ConvSpec {
    /// Square kernel, stride 1, no padding, one group.
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel_h: kernel,
            kernel_w: kernel,
            stride: 1,
            padding: 0,
            groups: 1,
            transposed: false,
        }
    }

    pub fn stride(mut self, s: usize) -> Self {
        self.stride = s;
        self
    }

    pub fn padding(mut self, p: usize) -> Self {
        self.padding = p;
        self
    }

    pub fn groups(mut self, g: usize) -> Self {
        self.groups = g;
        self
    }

    pub fn transposed(mut self) -> Self {
        self.transposed = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.groups;
        if g == 0 || self.in_channels % g != 0 || self.out_channels % g != 0 {
            return Err(Error::domain(format!(
                "channels {}->{} not divisible by {g} groups",
                self.in_channels, self.out_channels
            )));
        }
        if self.stride == 0 || self.kernel_h == 0 || self.kernel_w == 0 {
            return Err(Error::domain("stride and kernel size must be positive"));
        }
        if self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::domain("channel counts must be positive"));
        }
        Ok(())
    }

    pub fn weight_shape(&self) -> Shape {
        if self.transposed {
            [self.in_channels, self.out_channels / self.groups, self.kernel_h, self.kernel_w]
        } else {
            [self.out_channels, self.in_channels / self.groups, self.kernel_h, self.kernel_w]
        }
    }

    /// Fan-in of one output unit of the equivalent forward convolution.
    pub fn fan_in(&self) -> usize {
        self.in_channels / self.groups * self.kernel_h * self.kernel_w
    }

    /// Output spatial size for an input of `h × w`.
    pub fn output_size(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let (s, p) = (self.stride, self.padding);
        let one = |n: usize, k: usize| -> Result<usize> {
            if self.transposed {
                let full = (n.max(1) - 1) * s + k;
                if n == 0 || full <= 2 * p {
                    return Err(Error::domain(format!("transposed conv output from size {n} is empty")));
                }
                Ok(full - 2 * p)
            } else {
                let span = n + 2 * p;
                if span < k || (span - k) % s != 0 {
                    return Err(Error::domain(format!(
                        "input size {n} with kernel {k}, stride {s}, padding {p} does not tile exactly"
                    )));
                }
                Ok((span - k) / s + 1)
            }
        };
        Ok((one(h, self.kernel_h)?, one(w, self.kernel_w)?))
    }
}

/// Dimensions of a forward convolution `x (n, cin, h, w) -> y (n, cout, oh, ow)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    pub n: usize,
    pub cin: usize,
    pub h: usize,
    pub w: usize,
    pub cout: usize,
    pub oh: usize,
    pub ow: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
    pub groups: usize,
}

impl Geometry {
    /// Range of output columns whose tap `kx` lands inside the input row.
    #[inline]
    fn cols(&self, kx: usize) -> (usize, usize) {
        let (s, p) = (self.stride, self.pad);
        let lo = if p > kx { (p - kx).div_ceil(s) } else { 0 };
        let top = self.w + p;
        if top <= kx {
            return (0, 0);
        }
        let hi = ((top - 1 - kx) / s + 1).min(self.ow);
        (lo.min(hi), hi)
    }

    #[inline]
    fn row(&self, oy: usize, ky: usize) -> Option<usize> {
        let iy = oy * self.stride + ky;
        (iy >= self.pad && iy - self.pad < self.h).then(|| iy - self.pad)
    }

    fn x_len(&self) -> usize {
        self.cin * self.h * self.w
    }

    fn y_len(&self) -> usize {
        self.cout * self.oh * self.ow
    }
}

fn forward_item(geo: &Geometry, x: &[f64], wt: &[f64], y: &mut [f64]) {
    let cig = geo.cin / geo.groups;
    let cog = geo.cout / geo.groups;
    let (hw, ohw) = (geo.h * geo.w, geo.oh * geo.ow);
    for oc in 0..geo.cout {
        let g = oc / cog;
        let out = &mut y[oc * ohw..(oc + 1) * ohw];
        for icl in 0..cig {
            let xin = &x[(g * cig + icl) * hw..][..hw];
            for ky in 0..geo.kh {
                for kx in 0..geo.kw {
                    let wv = wt[((oc * cig + icl) * geo.kh + ky) * geo.kw + kx];
                    let (lo, hi) = geo.cols(kx);
                    for oy in 0..geo.oh {
                        let Some(iy) = geo.row(oy, ky) else { continue };
                        let row = &xin[iy * geo.w..(iy + 1) * geo.w];
                        let orow = &mut out[oy * geo.ow..(oy + 1) * geo.ow];
                        for ox in lo..hi {
                            orow[ox] += wv * row[ox * geo.stride + kx - geo.pad];
                        }
                    }
                }
            }
        }
    }
}

fn backward_input_item(geo: &Geometry, gy: &[f64], wt: &[f64], gx: &mut [f64]) {
    let cig = geo.cin / geo.groups;
    let cog = geo.cout / geo.groups;
    let (hw, ohw) = (geo.h * geo.w, geo.oh * geo.ow);
    for oc in 0..geo.cout {
        let g = oc / cog;
        let go = &gy[oc * ohw..(oc + 1) * ohw];
        for icl in 0..cig {
            let gin = &mut gx[(g * cig + icl) * hw..][..hw];
            for ky in 0..geo.kh {
                for kx in 0..geo.kw {
                    let wv = wt[((oc * cig + icl) * geo.kh + ky) * geo.kw + kx];
                    let (lo, hi) = geo.cols(kx);
                    for oy in 0..geo.oh {
                        let Some(iy) = geo.row(oy, ky) else { continue };
                        let grow = &go[oy * geo.ow..(oy + 1) * geo.ow];
                        let row = &mut gin[iy * geo.w..(iy + 1) * geo.w];
                        for ox in lo..hi {
                            row[ox * geo.stride + kx - geo.pad] += wv * grow[ox];
                        }
                    }
                }
            }
        }
    }
}

fn backward_weight_item(geo: &Geometry, x: &[f64], gy: &[f64], gw: &mut [f64]) {
    let cig = geo.cin / geo.groups;
    let cog = geo.cout / geo.groups;
    let (hw, ohw) = (geo.h * geo.w, geo.oh * geo.ow);
    for oc in 0..geo.cout {
        let g = oc / cog;
        let go = &gy[oc * ohw..(oc + 1) * ohw];
        for icl in 0..cig {
            let xin = &x[(g * cig + icl) * hw..][..hw];
            for ky in 0..geo.kh {
                for kx in 0..geo.kw {
                    let (lo, hi) = geo.cols(kx);
                    let mut acc = 0.0;
                    for oy in 0..geo.oh {
                        let Some(iy) = geo.row(oy, ky) else { continue };
                        let row = &xin[iy * geo.w..(iy + 1) * geo.w];
                        let grow = &go[oy * geo.ow..(oy + 1) * geo.ow];
                        for ox in lo..hi {
                            acc += grow[ox] * row[ox * geo.stride + kx - geo.pad];
                        }
                    }
                    gw[((oc * cig + icl) * geo.kh + ky) * geo.kw + kx] += acc;
                }
            }
        }
    }
}

pub(crate) fn conv_forward(geo: &Geometry, x: &[f64], wt: &[f64]) -> Vec<f64> {
    let (xl, yl) = (geo.x_len(), geo.y_len());
    let mut y = vec![0.0; geo.n * yl];
    y.par_chunks_mut(yl.max(1))
        .enumerate()
        .for_each(|(b, out)| forward_item(geo, &x[b * xl..(b + 1) * xl], wt, out));
    y
}

pub(crate) fn conv_backward_input(geo: &Geometry, gy: &[f64], wt: &[f64]) -> Vec<f64> {
    let (xl, yl) = (geo.x_len(), geo.y_len());
    let mut gx = vec![0.0; geo.n * xl];
    gx.par_chunks_mut(xl.max(1))
        .enumerate()
        .for_each(|(b, gin)| backward_input_item(geo, &gy[b * yl..(b + 1) * yl], wt, gin));
    gx
}

pub(crate) fn conv_backward_weight(geo: &Geometry, x: &[f64], gy: &[f64]) -> Vec<f64> {
    let (xl, yl) = (geo.x_len(), geo.y_len());
    let wl = geo.cout * (geo.cin / geo.groups) * geo.kh * geo.kw;
    let partials: Vec<Vec<f64>> = (0..geo.n)
        .into_par_iter()
        .map(|b| {
            let mut gw = vec![0.0; wl];
            backward_weight_item(geo, &x[b * xl..(b + 1) * xl], &gy[b * yl..(b + 1) * yl], &mut gw);
            gw
        })
        .collect();
    // batch partials are added in index order regardless of thread count
    let mut gw = vec![0.0; wl];
    for p in &partials {
        gw.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    gw
}

fn add_bias(y: &mut [f64], bias: &[f64], plane: usize) {
    for (i, v) in y.iter_mut().enumerate() {
        *v += bias[i / plane % bias.len()];
    }
}

fn bias_grad(g: &[f64], channels: usize, plane: usize) -> Vec<f64> {
    let mut gb = vec![0.0; channels];
    for (i, v) in g.iter().enumerate() {
        gb[i / plane % channels] += v;
    }
    gb
}

fn check_inputs(x: &Tensor, weight: &Tensor, bias: Option<&Tensor>, spec: &ConvSpec) -> Result<()> {
    spec.validate()?;
    let [_, c, _, _] = x.shape();
    if c != spec.in_channels {
        return Err(Error::domain(format!(
            "conv expects {} input channels, got input of shape {:?}",
            spec.in_channels,
            x.shape()
        )));
    }
    if weight.shape() != spec.weight_shape() {
        return Err(Error::domain(format!(
            "conv weight shape {:?}, expected {:?}",
            weight.shape(),
            spec.weight_shape()
        )));
    }
    if let Some(b) = bias {
        if b.numel() != spec.out_channels {
            return Err(Error::domain(format!(
                "conv bias has {} entries for {} output channels",
                b.numel(),
                spec.out_channels
            )));
        }
    }
    Ok(())
}

/// Cross-correlation with optional per-channel bias.
pub fn conv2d(x: &Tensor, weight: &Tensor, bias: Option<&Tensor>, spec: &ConvSpec) -> Result<Tensor> {
    if spec.transposed {
        return Err(Error::domain("conv2d given a transposed spec; use conv_transpose2d"));
    }
    check_inputs(x, weight, bias, spec)?;
    let [n, cin, h, w] = x.shape();
    let (oh, ow) = spec.output_size(h, w)?;
    let geo = Geometry {
        n,
        cin,
        h,
        w,
        cout: spec.out_channels,
        oh,
        ow,
        kh: spec.kernel_h,
        kw: spec.kernel_w,
        stride: spec.stride,
        pad: spec.padding,
        groups: spec.groups,
    };
    let mut y = conv_forward(&geo, x.data(), weight.data());
    if let Some(b) = bias {
        add_bias(&mut y, b.data(), oh * ow);
    }
    let mut parents = vec![x.clone(), weight.clone()];
    parents.extend(bias.cloned());
    let (xt, wt, has_bias) = (x.clone(), weight.clone(), bias.is_some());
    Ok(Tensor::from_op([n, spec.out_channels, oh, ow], y, parents, move |g| {
        let mut out = vec![
            xt.requires_grad().then(|| conv_backward_input(&geo, g, wt.data())),
            wt.requires_grad().then(|| conv_backward_weight(&geo, xt.data(), g)),
        ];
        if has_bias {
            out.push(Some(bias_grad(g, geo.cout, geo.oh * geo.ow)));
        }
        out
    }))
}

/// Transposed convolution: the adjoint of [`conv2d`] with the same weight,
/// output size `(H - 1)·s - 2p + k`.
pub fn conv_transpose2d(x: &Tensor, weight: &Tensor, bias: Option<&Tensor>, spec: &ConvSpec) -> Result<Tensor> {
    if !spec.transposed {
        return Err(Error::domain("conv_transpose2d needs a transposed spec"));
    }
    check_inputs(x, weight, bias, spec)?;
    let [n, cin, h, w] = x.shape();
    let (oh, ow) = spec.output_size(h, w)?;
    // the forward convolution this is the adjoint of maps (cout, oh, ow) -> (cin, h, w)
    let geo = Geometry {
        n,
        cin: spec.out_channels,
        h: oh,
        w: ow,
        cout: cin,
        oh: h,
        ow: w,
        kh: spec.kernel_h,
        kw: spec.kernel_w,
        stride: spec.stride,
        pad: spec.padding,
        groups: spec.groups,
    };
    let mut y = conv_backward_input(&geo, x.data(), weight.data());
    if let Some(b) = bias {
        add_bias(&mut y, b.data(), oh * ow);
    }
    let mut parents = vec![x.clone(), weight.clone()];
    parents.extend(bias.cloned());
    let (xt, wt, has_bias) = (x.clone(), weight.clone(), bias.is_some());
    Ok(Tensor::from_op([n, spec.out_channels, oh, ow], y, parents, move |g| {
        let mut out = vec![
            xt.requires_grad().then(|| conv_forward(&geo, g, wt.data())),
            wt.requires_grad().then(|| conv_backward_weight(&geo, g, xt.data())),
        ];
        if has_bias {
            out.push(Some(bias_grad(g, geo.cin, geo.h * geo.w)));
        }
        out
    }))
}
