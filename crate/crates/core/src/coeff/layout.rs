use crate::error::{Error, Result};
use crate::jpeg::color::{pad_to_mcu, rgb_to_ycbcr, subsample_chroma};
use crate::jpeg::{dct_forward_block, dct_inverse_block, ChannelRole, CoefficientImage, CoefficientPlane, Image, PixelPlane, QuantMatrix, Subsampling};

/// Coefficients stored channelwise: channel `k` at `(r, c)` is frequency
/// `(k / 8, k % 8)` of block `(r, c)`. Values are channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedPlane {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl RearrangedPlane {
    pub const CHANNELS: usize = 64;

    #[inline]
    pub fn get(&self, k: usize, r: usize, c: usize) -> f64 {
        self.values[(k * self.rows + r) * self.cols + c]
    }

    /// The map of one frequency over all blocks.
    pub fn channel(&self, k: usize) -> &[f64] {
        let n = self.rows * self.cols;
        &self.values[k * n..(k + 1) * n]
    }
}

pub fn rearrange_frequencies(plane: &CoefficientPlane) -> Result<RearrangedPlane> {
    let (rows, cols) = (plane.block_rows, plane.block_cols);
    if rows == 0 || cols == 0 || plane.values.len() != rows * cols * 64 {
        return Err(Error::domain("coefficient plane is not a whole number of blocks"));
    }
    let w = plane.width();
    let mut values = vec![0.0; rows * cols * 64];
    for (i, &v) in plane.values.iter().enumerate() {
        let (y, x) = (i / w, i % w);
        let k = (y % 8) * 8 + x % 8;
        values[(k * rows + y / 8) * cols + x / 8] = v;
    }
    Ok(RearrangedPlane { rows, cols, values })
}

pub fn unrearrange_frequencies(r: &RearrangedPlane, quant: QuantMatrix) -> CoefficientPlane {
    let mut out = CoefficientPlane::zeros(r.rows, r.cols, quant);
    let w = out.width();
    for (i, v) in out.values.iter_mut().enumerate() {
        let (y, x) = (i / w, i % w);
        *v = r.get((y % 8) * 8 + x % 8, y / 8, x / 8);
    }
    out
}

/// Doubles the block grid by copying every block into a 2×2 neighbourhood.
pub fn nn_upsample_coefficient_plane(plane: &CoefficientPlane) -> CoefficientPlane {
    let mut out = CoefficientPlane::zeros(plane.block_rows * 2, plane.block_cols * 2, plane.quant);
    for r in 0..out.block_rows {
        for c in 0..out.block_cols {
            out.set_block(r, c, &plane.block(r / 2, c / 2));
        }
    }
    out
}

/// Coefficients of the pixel-space nearest-neighbour 2× upsampling of the
/// plane: every output block is the DCT of one quadrant of an input block
/// with each sample repeated 2×2. Linear, and exact up to float rounding, so
/// the inverse DCT reproduces the decoder's chroma upsampling.
pub fn pixel_upsample_coefficient_plane(plane: &CoefficientPlane) -> CoefficientPlane {
    let mut out = CoefficientPlane::zeros(plane.block_rows * 2, plane.block_cols * 2, plane.quant);
    for r in 0..plane.block_rows {
        for c in 0..plane.block_cols {
            let px = dct_inverse_block(&plane.block(r, c));
            for (qy, qx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let up: [f64; 64] = std::array::from_fn(|i| px[(qy * 4 + i / 16) * 8 + qx * 4 + (i % 8) / 2]);
                out.set_block(2 * r + qy, 2 * c + qx, &dct_forward_block(&up));
            }
        }
    }
    out
}

/// Keeps blocks at even grid positions; inverse of the block upsampling.
pub fn decimate_blocks(plane: &CoefficientPlane) -> CoefficientPlane {
    let (rows, cols) = (plane.block_rows.div_ceil(2), plane.block_cols.div_ceil(2));
    let mut out = CoefficientPlane::zeros(rows, cols, plane.quant);
    for r in 0..rows {
        for c in 0..cols {
            out.set_block(r, c, &plane.block(2 * r, 2 * c));
        }
    }
    out
}

/// Level-shifted forward DCT of a plane whose dims are multiples of 8, with
/// no quantization. The attached table is all ones.
pub fn pixels_to_coefficients(plane: &PixelPlane, role: ChannelRole) -> Result<CoefficientPlane> {
    let (w, h) = (plane.width(), plane.height());
    if w % 8 != 0 || h % 8 != 0 || w == 0 || h == 0 {
        return Err(Error::domain(format!("plane {w}x{h} is not a positive multiple of 8")));
    }
    let mut out = CoefficientPlane::zeros(h / 8, w / 8, QuantMatrix::uniform(1, role)?);
    for r in 0..h / 8 {
        for c in 0..w / 8 {
            let px: [f64; 64] = std::array::from_fn(|i| plane.get(c * 8 + i % 8, r * 8 + i / 8) as f64 - 128.0);
            out.set_block(r, c, &dct_forward_block(&px));
        }
    }
    Ok(out)
}

/// Unquantized DCT coefficients laid out exactly like the encoder's planes
/// (same color conversion, padding and chroma subsampling). These are the
/// regression targets and the corpus for normalization statistics.
pub fn image_to_coefficients(image: &Image, subsampling: Subsampling) -> Result<CoefficientImage> {
    let (w, h) = (image.width(), image.height());
    if image.is_gray() {
        return Ok(CoefficientImage {
            y: pixels_to_coefficients(&pad_to_mcu(image.plane(0), 8)?, ChannelRole::Luma)?,
            cb: None,
            cr: None,
            subsampling: Subsampling::S444,
            width: w,
            height: h,
        });
    }
    let ycc = rgb_to_ycbcr(image)?;
    let mcu = subsampling.mcu_size();
    let mut planes = Vec::with_capacity(3);
    for (i, p) in ycc.planes().iter().enumerate() {
        let mut padded = pad_to_mcu(p, mcu)?;
        let role = if i == 0 { ChannelRole::Luma } else { ChannelRole::Chroma };
        if i > 0 && subsampling == Subsampling::S420 {
            padded = subsample_chroma(&padded)?;
        }
        planes.push(pixels_to_coefficients(&padded, role)?);
    }
    let cr = planes.pop();
    let cb = planes.pop();
    Ok(CoefficientImage {
        y: planes.pop().expect("luma"),
        cb,
        cr,
        subsampling,
        width: w,
        height: h,
    })
}
