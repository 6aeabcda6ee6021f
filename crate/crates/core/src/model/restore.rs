//! Inference: coefficient planes in, restored coefficient planes out.

use super::checkpoint::ModelCheckpoint;
use crate::coeff::{denormalize_plane, normalize_plane, normalize_quant_matrix, pixel_upsample_coefficient_plane, FrequencyStats};
use crate::error::{Error, Result};
use crate::jpeg::{coefficient_image_to_pixels, decode_jpeg_coefficients, CoefficientImage, CoefficientPlane, Image, QuantMatrix, Subsampling};
use crate::nn::Tensor;

/// The normalized table as a `(1, 1, 8, 8)` constant.
pub fn qnorm_tensor(q: &QuantMatrix) -> Tensor {
    Tensor::new([1, 1, 8, 8], normalize_quant_matrix(q).to_vec()).expect("64 values")
}

/// Stacks same-sized planes into an `(N, 1, H, W)` constant.
pub fn planes_to_tensor(planes: &[&CoefficientPlane]) -> Result<Tensor> {
    let first = planes.first().ok_or_else(|| Error::domain("no planes to stack"))?;
    let (h, w) = (first.height(), first.width());
    let mut data = Vec::with_capacity(planes.len() * h * w);
    for p in planes {
        if (p.height(), p.width()) != (h, w) {
            return Err(Error::domain(format!(
                "cannot stack a {}x{} plane with {w}x{h}",
                p.width(),
                p.height()
            )));
        }
        data.extend_from_slice(&p.values);
    }
    Tensor::new([planes.len(), 1, h, w], data)
}

/// Splits an `(N, 1, H, W)` tensor into planes carrying `quant`.
pub fn tensor_to_planes(t: &Tensor, quant: QuantMatrix) -> Result<Vec<CoefficientPlane>> {
    let [n, c, h, w] = t.shape();
    if c != 1 {
        return Err(Error::domain(format!("expected one channel, got {c}")));
    }
    t.data()
        .chunks_exact(h * w)
        .take(n)
        .map(|v| CoefficientPlane::from_values(h, w, v.to_vec(), quant))
        .collect()
}

/// Per-frequency mean and std tiled over an `(n, 1, h, w)` grid.
pub fn stats_maps(stats: &FrequencyStats, shape: [usize; 4]) -> (Tensor, Tensor) {
    let [n, _, h, w] = shape;
    let k = |i: usize| {
        let (y, x) = ((i / w) % h, i % w);
        (y % 8) * 8 + x % 8
    };
    let count = n * h * w;
    let mean = (0..count).map(|i| stats.mean[k(i)]).collect();
    let std = (0..count).map(|i| stats.std[k(i)]).collect();
    (
        Tensor::new([n, 1, h, w], mean).expect("shape"),
        Tensor::new([n, 1, h, w], std).expect("shape"),
    )
}

/// `x·std + mean` inside the graph.
pub fn denormalize_tensor(x: &Tensor, stats: &FrequencyStats) -> Result<Tensor> {
    let (mean, std) = stats_maps(stats, x.shape());
    x.mul(&std)?.add(&mean)
}

/// Restores a dequantized luma plane.
pub fn y_restore(y_plane: &CoefficientPlane, q_luma: &QuantMatrix, ckpt: &ModelCheckpoint) -> Result<CoefficientPlane> {
    let model = ckpt.model()?;
    let stats = &ckpt.stats.luma;
    let x = planes_to_tensor(&[&normalize_plane(y_plane, stats)?])?;
    let b = ckpt.params.bind_frozen();
    let out = model.y.forward(&b, &x, &qnorm_tensor(q_luma))?;
    let planes = tensor_to_planes(&out, y_plane.quant)?;
    denormalize_plane(&planes[0], stats)
}

/// Restores chroma planes sharing one quantization table against the
/// restored luma plane. Outputs are at luma resolution.
pub fn color_restore_batch(
    planes: &[&CoefficientPlane],
    y_restored: &CoefficientPlane,
    q_chroma: &QuantMatrix,
    q_luma: &QuantMatrix,
    ckpt: &ModelCheckpoint,
) -> Result<Vec<CoefficientPlane>> {
    for p in planes {
        if 2 * p.height() != y_restored.height() || 2 * p.width() != y_restored.width() {
            return Err(Error::domain(format!(
                "chroma {}x{} is not half of luma {}x{}",
                p.width(),
                p.height(),
                y_restored.width(),
                y_restored.height()
            )));
        }
    }
    let model = ckpt.model()?;
    let (cs, ys) = (&ckpt.stats.chroma, &ckpt.stats.luma);
    let chroma: Vec<CoefficientPlane> = planes.iter().map(|p| normalize_plane(p, cs)).collect::<Result<_>>()?;
    let luma = normalize_plane(y_restored, ys)?;
    let base: Vec<CoefficientPlane> = planes
        .iter()
        .map(|p| normalize_plane(&pixel_upsample_coefficient_plane(p), cs))
        .collect::<Result<_>>()?;
    let b = ckpt.params.bind_frozen();
    let residual = model.color.forward(
        &b,
        &planes_to_tensor(&chroma.iter().collect::<Vec<_>>())?,
        &planes_to_tensor(&vec![&luma; planes.len()])?,
        &qnorm_tensor(q_chroma),
        &qnorm_tensor(q_luma),
    )?;
    let out = planes_to_tensor(&base.iter().collect::<Vec<_>>())?.add(&residual)?;
    tensor_to_planes(&out, planes[0].quant)?
        .iter()
        .map(|p| denormalize_plane(p, cs))
        .collect()
}

/// Restores one chroma plane (half luma resolution) guided by restored luma.
pub fn color_restore(
    c_plane: &CoefficientPlane,
    y_restored: &CoefficientPlane,
    q_chroma: &QuantMatrix,
    q_luma: &QuantMatrix,
    ckpt: &ModelCheckpoint,
) -> Result<CoefficientPlane> {
    Ok(color_restore_batch(&[c_plane], y_restored, q_chroma, q_luma, ckpt)?.remove(0))
}

/// Restores every plane of a decoded image. 4:2:0 chroma comes back at luma
/// resolution (the result is tagged 4:4:4); 4:4:4 chroma and gray images
/// only go through the luma network.
pub fn restore_coefficients(image: &CoefficientImage, ckpt: &ModelCheckpoint) -> Result<CoefficientImage> {
    let q_luma = image.y.quant;
    let y = y_restore(&image.y, &q_luma, ckpt)?;
    let (cb, cr) = match (&image.cb, &image.cr) {
        (Some(cb), Some(cr)) if image.subsampling == Subsampling::S420 => {
            if cb.quant == cr.quant {
                let mut out = color_restore_batch(&[cb, cr], &y, &cb.quant, &q_luma, ckpt)?;
                let cr = out.pop();
                (out.pop(), cr)
            } else {
                (
                    Some(color_restore(cb, &y, &cb.quant, &q_luma, ckpt)?),
                    Some(color_restore(cr, &y, &cr.quant, &q_luma, ckpt)?),
                )
            }
        }
        (cb, cr) => (cb.clone(), cr.clone()),
    };
    let subsampling = if cb.is_some() { Subsampling::S444 } else { image.subsampling };
    Ok(CoefficientImage {
        y,
        cb,
        cr,
        subsampling,
        width: image.width,
        height: image.height,
    })
}

/// Decodes a baseline JPEG and returns the restored image at its original size.
pub fn restore_image(jpeg: &[u8], ckpt: &ModelCheckpoint) -> Result<Image> {
    let (coeffs, _) = decode_jpeg_coefficients(jpeg)?;
    coefficient_image_to_pixels(&restore_coefficients(&coeffs, ckpt)?)
}
