use super::color::{pad_to_mcu, rgb_to_ycbcr, subsample_chroma};
use super::dct::dct_forward_block;
use super::entropy::{entropy_encode_scan, scan_layout};
use super::huffman::{HuffmanSet, HuffmanTable};
use super::quant::{quality_to_tables, quantize_block_with, QuantRounding};
use super::types::{Image, PixelPlane, QuantMatrix, QuantizedImage, QuantizedPlane, Subsampling};
use super::zigzag::ZIGZAG;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    pub quality: u8,
    pub subsampling: Subsampling,
    pub rounding: QuantRounding,
}

impl EncodeOptions {
    pub fn new(quality: u8, subsampling: Subsampling) -> Self {
        Self {
            quality,
            subsampling,
            rounding: QuantRounding::Truncate,
        }
    }

    pub fn with_rounding(mut self, rounding: QuantRounding) -> Self {
        self.rounding = rounding;
        self
    }
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self::new(75, Subsampling::S420)
    }
}

/// Level shift, forward DCT and quantization of one padded plane.
pub fn plane_to_blocks(plane: &PixelPlane, q: &QuantMatrix, rounding: QuantRounding) -> QuantizedPlane {
    let rows = plane.height() / 8;
    let cols = plane.width() / 8;
    let mut out = QuantizedPlane::zeros(rows, cols, *q);
    for r in 0..rows {
        for c in 0..cols {
            let mut px = [0.0; 64];
            for y in 0..8 {
                for x in 0..8 {
                    px[y * 8 + x] = plane.get(c * 8 + x, r * 8 + y) as f64 - 128.0;
                }
            }
            *out.block_mut(r, c) = quantize_block_with(&dct_forward_block(&px), q, rounding);
        }
    }
    out
}

/// Runs the lossy half of compression: color conversion, padding, chroma
/// subsampling, DCT and quantization. Gray images produce a luma-only result.
pub fn encode_to_coefficients(image: &Image, opts: &EncodeOptions) -> Result<QuantizedImage> {
    let (qy, qc) = quality_to_tables(opts.quality)?;
    let (w, h) = (image.width(), image.height());
    if w == 0 || h == 0 {
        return Err(Error::domain("cannot encode an empty image"));
    }
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(Error::domain(format!("image {w}x{h} exceeds the 65535-pixel JPEG limit")));
    }
    if image.is_gray() {
        let y = pad_to_mcu(image.plane(0), 8)?;
        return Ok(QuantizedImage {
            y: plane_to_blocks(&y, &qy, opts.rounding),
            cb: None,
            cr: None,
            subsampling: Subsampling::S444,
            width: w,
            height: h,
        });
    }
    let ycc = rgb_to_ycbcr(image)?;
    let mcu = opts.subsampling.mcu_size();
    let y = pad_to_mcu(ycc.plane(0), mcu)?;
    let mut cb = pad_to_mcu(ycc.plane(1), mcu)?;
    let mut cr = pad_to_mcu(ycc.plane(2), mcu)?;
    if opts.subsampling == Subsampling::S420 {
        cb = subsample_chroma(&cb)?;
        cr = subsample_chroma(&cr)?;
    }
    Ok(QuantizedImage {
        y: plane_to_blocks(&y, &qy, opts.rounding),
        cb: Some(plane_to_blocks(&cb, &qc, opts.rounding)),
        cr: Some(plane_to_blocks(&cr, &qc, opts.rounding)),
        subsampling: opts.subsampling,
        width: w,
        height: h,
    })
}

fn segment(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn dht_payload(table: &HuffmanTable) -> Vec<u8> {
    let class = match table.class {
        super::huffman::TableClass::Dc => 0u8,
        super::huffman::TableClass::Ac => 1u8,
    };
    let mut p = vec![(class << 4) | table.id];
    p.extend_from_slice(&table.bits);
    p.extend_from_slice(&table.values);
    p
}

/// Serializes quantized coefficients as a baseline JFIF file using the
/// standard Huffman tables.
pub fn write_jpeg(image: &QuantizedImage) -> Result<Vec<u8>> {
    if image.width > u16::MAX as usize || image.height > u16::MAX as usize {
        return Err(Error::domain("image dimensions exceed 65535"));
    }
    let tables = HuffmanSet::standard();
    let scan = entropy_encode_scan(image, &tables)?;
    let mut out = Vec::with_capacity(scan.len() + 700);
    out.extend_from_slice(&[0xFF, 0xD8]);
    segment(&mut out, 0xE0, &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0]);

    let mut dqt = Vec::new();
    let mut add_quant = |id: u8, q: &QuantMatrix| {
        dqt.push(id);
        dqt.extend(ZIGZAG.iter().map(|&k| q.entries()[k] as u8));
    };
    add_quant(0, &image.y.quant);
    if let Some(cb) = &image.cb {
        add_quant(1, &cb.quant);
    }
    segment(&mut out, 0xDB, &dqt);

    let (comps, _, _, _) = scan_layout(image);
    let mut sof = vec![8];
    sof.extend_from_slice(&(image.height as u16).to_be_bytes());
    sof.extend_from_slice(&(image.width as u16).to_be_bytes());
    sof.push(comps.len() as u8);
    for (i, comp) in comps.iter().enumerate() {
        let tq = if i == 0 { 0 } else { 1 };
        sof.extend_from_slice(&[i as u8 + 1, ((comp.h as u8) << 4) | comp.v as u8, tq]);
    }
    segment(&mut out, 0xC0, &sof);

    let mut dht = Vec::new();
    let ids: &[u8] = if image.is_gray() { &[0] } else { &[0, 1] };
    for &id in ids {
        dht.extend(dht_payload(tables.dc[id as usize].as_ref().expect("standard")));
        dht.extend(dht_payload(tables.ac[id as usize].as_ref().expect("standard")));
    }
    segment(&mut out, 0xC4, &dht);

    let mut sos = vec![comps.len() as u8];
    for (i, comp) in comps.iter().enumerate() {
        sos.extend_from_slice(&[i as u8 + 1, (comp.dc_table << 4) | comp.ac_table]);
    }
    sos.extend_from_slice(&[0, 63, 0]);
    segment(&mut out, 0xDA, &sos);
    out.extend_from_slice(&scan);
    out.extend_from_slice(&[0xFF, 0xD9]);
    Ok(out)
}

/// Compresses an RGB (or gray) image to a baseline JFIF byte stream.
pub fn encode_jpeg(image: &Image, opts: &EncodeOptions) -> Result<Vec<u8>> {
    write_jpeg(&encode_to_coefficients(image, opts)?)
}
