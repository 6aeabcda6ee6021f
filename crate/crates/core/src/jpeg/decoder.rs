//! Marker-level parser and baseline decoder.

use super::color::{upsample_chroma, ycbcr_to_rgb};
use super::dct::dct_inverse_block;
use super::entropy::{decode_block, mcu_order, ScanComponent};
use super::huffman::{BitReader, HuffmanSet, HuffmanTable, TableClass};
use super::quant::dequantize_block;
use super::types::{
    ChannelRole, CoefficientImage, CoefficientPlane, Image, PixelPlane, QuantMatrix, QuantizedImage, QuantizedPlane,
    Subsampling,
};
use super::zigzag::ZIGZAG;
use crate::error::{Error, Result};

/// One marker segment seen while parsing, for inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerInfo {
    pub offset: usize,
    pub code: u8,
    pub name: String,
    /// Payload length excluding the marker, or 0 for standalone markers.
    pub length: usize,
}

pub fn marker_name(code: u8) -> String {
    match code {
        0xD8 => "SOI".into(),
        0xD9 => "EOI".into(),
        0xC0 => "SOF0".into(),
        0xC1 => "SOF1".into(),
        0xC2 => "SOF2".into(),
        0xC3 => "SOF3".into(),
        0xC4 => "DHT".into(),
        0xC5..=0xC7 => format!("SOF{}", code - 0xC0),
        0xC8 => "JPG".into(),
        0xC9..=0xCB | 0xCD..=0xCF => format!("SOF{}", code - 0xC0),
        0xCC => "DAC".into(),
        0xD0..=0xD7 => format!("RST{}", code - 0xD0),
        0xDA => "SOS".into(),
        0xDB => "DQT".into(),
        0xDC => "DNL".into(),
        0xDD => "DRI".into(),
        0xE0..=0xEF => format!("APP{}", code - 0xE0),
        0xFE => "COM".into(),
        other => format!("0x{other:02X}"),
    }
}

#[derive(Debug, Clone)]
struct FrameComponent {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
    blocks_w: usize,
    blocks_h: usize,
    blocks: Vec<super::types::CoefficientBlock>,
}

#[derive(Debug, Clone)]
struct Frame {
    width: usize,
    height: usize,
    hmax: usize,
    vmax: usize,
    mcu_cols: usize,
    mcu_rows: usize,
    components: Vec<FrameComponent>,
}

/// Result of parsing a file down to quantized coefficients.
#[derive(Debug, Clone)]
pub struct ParsedJpeg {
    pub image: QuantizedImage,
    pub markers: Vec<MarkerInfo>,
    /// Quantization tables indexed by DQT destination id.
    pub quant_tables: [Option<[u16; 64]>; 4],
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u8(&mut self) -> Result<u8> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| Error::parse(self.pos, "unexpected end of data"))?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(((self.u8()? as u16) << 8) | self.u8()? as u16)
    }

    fn segment(&mut self) -> Result<(usize, &'a [u8])> {
        let start = self.pos;
        let len = self.u16()? as usize;
        if len < 2 || start + len > self.data.len() {
            return Err(Error::parse(start, format!("segment length {len} exceeds the data")));
        }
        self.pos = start + len;
        Ok((start + 2, &self.data[start + 2..start + len]))
    }
}

fn parse_dqt(payload: &[u8], base: usize, tables: &mut [Option<[u16; 64]>; 4]) -> Result<()> {
    let mut i = 0;
    while i < payload.len() {
        let pq = payload[i] >> 4;
        let tq = (payload[i] & 0x0F) as usize;
        if tq > 3 {
            return Err(Error::parse(base + i, format!("DQT destination {tq} > 3")));
        }
        i += 1;
        let size = if pq == 0 { 64 } else { 128 };
        if i + size > payload.len() {
            return Err(Error::parse(base + i, "DQT segment truncated"));
        }
        let mut table = [0u16; 64];
        for k in 0..64 {
            let v = if pq == 0 {
                payload[i + k] as u16
            } else {
                u16::from_be_bytes([payload[i + 2 * k], payload[i + 2 * k + 1]])
            };
            table[ZIGZAG[k]] = v;
        }
        if let Some(v) = table.iter().find(|&&v| v == 0 || v > 255) {
            return Err(Error::Unsupported(format!("quantization divisor {v} outside [1, 255]")));
        }
        tables[tq] = Some(table);
        i += size;
    }
    Ok(())
}

fn parse_dht(payload: &[u8], base: usize, set: &mut HuffmanSet) -> Result<()> {
    let mut i = 0;
    while i < payload.len() {
        let tc = payload[i] >> 4;
        let th = payload[i] & 0x0F;
        if tc > 1 || th > 3 {
            return Err(Error::parse(base + i, format!("bad DHT class/id byte {:#04x}", payload[i])));
        }
        if i + 17 > payload.len() {
            return Err(Error::parse(base + i, "DHT segment truncated"));
        }
        let mut bits = [0u8; 16];
        bits.copy_from_slice(&payload[i + 1..i + 17]);
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        i += 17;
        if i + total > payload.len() {
            return Err(Error::parse(base + i, "DHT values truncated"));
        }
        let class = if tc == 0 { TableClass::Dc } else { TableClass::Ac };
        let table = HuffmanTable::new(class, th, bits, payload[i..i + total].to_vec()).map_err(|e| match e {
            Error::Domain(m) => Error::parse(base + i, m),
            other => other,
        })?;
        set.insert(table);
        i += total;
    }
    Ok(())
}

fn parse_sof(code: u8, payload: &[u8], base: usize) -> Result<Frame> {
    match code {
        0xC0 | 0xC1 => {}
        0xC2 | 0xC6 => return Err(Error::Unsupported("progressive unsupported (SOF2)".into())),
        0xC3 | 0xC7 => return Err(Error::Unsupported(format!("lossless unsupported ({})", marker_name(code)))),
        0xC5 => return Err(Error::Unsupported("hierarchical unsupported (SOF5)".into())),
        0xC9..=0xCB | 0xCD..=0xCF => {
            return Err(Error::Unsupported(format!("arithmetic coding unsupported ({})", marker_name(code))))
        }
        _ => return Err(Error::Unsupported(format!("frame type {} unsupported", marker_name(code)))),
    }
    if payload.len() < 6 {
        return Err(Error::parse(base, "SOF segment truncated"));
    }
    if payload[0] != 8 {
        return Err(Error::Unsupported(format!("{}-bit precision unsupported", payload[0])));
    }
    let height = u16::from_be_bytes([payload[1], payload[2]]) as usize;
    let width = u16::from_be_bytes([payload[3], payload[4]]) as usize;
    let n = payload[5] as usize;
    if height == 0 {
        return Err(Error::Unsupported("DNL-defined image height unsupported".into()));
    }
    if width == 0 {
        return Err(Error::parse(base + 3, "zero image width"));
    }
    if n == 0 || payload.len() < 6 + 3 * n {
        return Err(Error::parse(base + 5, "SOF component list truncated"));
    }
    let mut comps = Vec::with_capacity(n);
    for c in 0..n {
        let p = &payload[6 + 3 * c..9 + 3 * c];
        let (h, v) = ((p[1] >> 4) as usize, (p[1] & 0x0F) as usize);
        if !(1..=4).contains(&h) || !(1..=4).contains(&v) || p[2] > 3 {
            return Err(Error::parse(base + 6 + 3 * c, "invalid component sampling or table id"));
        }
        comps.push((p[0], h, v, p[2] as usize));
    }
    let hmax = comps.iter().map(|c| c.1).max().unwrap_or(1);
    let vmax = comps.iter().map(|c| c.2).max().unwrap_or(1);
    let mcu_cols = width.div_ceil(8 * hmax);
    let mcu_rows = height.div_ceil(8 * vmax);
    let components = comps
        .into_iter()
        .map(|(id, h, v, tq)| FrameComponent {
            id,
            h,
            v,
            tq,
            blocks_w: mcu_cols * h,
            blocks_h: mcu_rows * v,
            blocks: vec![Default::default(); mcu_cols * h * mcu_rows * v],
        })
        .collect();
    Ok(Frame {
        width,
        height,
        hmax,
        vmax,
        mcu_cols,
        mcu_rows,
        components,
    })
}

/// Decodes one scan starting at `data[start]` (just after the SOS segment).
/// Returns the offset of the first byte after the entropy-coded data.
fn decode_scan(
    data: &[u8],
    start: usize,
    frame: &mut Frame,
    scan: &[(usize, u8, u8)],
    huffman: &HuffmanSet,
    restart_interval: usize,
) -> Result<usize> {
    let comps: Vec<ScanComponent> = scan
        .iter()
        .map(|&(ci, td, ta)| ScanComponent {
            h: frame.components[ci].h,
            v: frame.components[ci].v,
            dc_table: td,
            ac_table: ta,
        })
        .collect();
    let single = if scan.len() == 1 {
        let c = &frame.components[scan[0].0];
        let cw = (frame.width * c.h).div_ceil(frame.hmax);
        let ch = (frame.height * c.v).div_ceil(frame.vmax);
        Some((ch.div_ceil(8), cw.div_ceil(8)))
    } else {
        None
    };
    let mut tables = Vec::with_capacity(comps.len());
    for c in &comps {
        let dc = huffman
            .get(TableClass::Dc, c.dc_table)
            .ok_or_else(|| Error::parse(start, format!("scan uses undefined DC table {}", c.dc_table)))?;
        let ac = huffman
            .get(TableClass::Ac, c.ac_table)
            .ok_or_else(|| Error::parse(start, format!("scan uses undefined AC table {}", c.ac_table)))?;
        tables.push((dc, ac));
    }
    let mut reader = BitReader::new(&data[start..], start);
    let mut preds = vec![0i32; comps.len()];
    let mut expected_rst = 0u8;
    let order = mcu_order(&comps, frame.mcu_cols, frame.mcu_rows, single);
    let total = order.len();
    for (m, mcu) in order.into_iter().enumerate() {
        if restart_interval > 0 && m > 0 && m % restart_interval == 0 {
            reader.align();
            let p = reader.position();
            let rel = &data[start + p..];
            if rel.len() < 2 || rel[0] != 0xFF || rel[1] != 0xD0 + expected_rst {
                return Err(Error::parse(
                    start + p,
                    format!("expected RST{} after {m} of {total} MCUs", expected_rst),
                ));
            }
            reader.seek(p + 2);
            expected_rst = (expected_rst + 1) & 7;
            preds.iter_mut().for_each(|p| *p = 0);
        }
        for (si, r, c) in mcu {
            let (dc, ac) = tables[si];
            let block = decode_block(&mut reader, &mut preds[si], dc, ac)?;
            let comp = &mut frame.components[scan[si].0];
            comp.blocks[r * comp.blocks_w + c] = block;
        }
    }
    // skip to the next non-RST marker
    let mut p = start + reader.position();
    while p + 1 < data.len() {
        if data[p] == 0xFF && data[p + 1] != 0x00 && !(0xD0..=0xD7).contains(&data[p + 1]) && data[p + 1] != 0xFF {
            return Ok(p);
        }
        p += 1;
    }
    Err(Error::parse(data.len(), "missing EOI after scan data"))
}

fn to_image(frame: Frame, quant_tables: &[Option<[u16; 64]>; 4]) -> Result<QuantizedImage> {
    let n = frame.components.len();
    let subsampling = match n {
        1 => Subsampling::S444,
        3 => {
            let c = &frame.components;
            if c.iter().all(|x| x.h == c[0].h && x.v == c[0].v) {
                Subsampling::S444
            } else if (c[0].h, c[0].v) == (2, 2) && c[1..].iter().all(|x| (x.h, x.v) == (1, 1)) {
                Subsampling::S420
            } else {
                let f: Vec<String> = c.iter().map(|x| format!("{}x{}", x.h, x.v)).collect();
                return Err(Error::Unsupported(format!("sampling factors {} unsupported", f.join(","))));
            }
        }
        other => return Err(Error::Unsupported(format!("{other}-component images unsupported"))),
    };
    let mut planes = Vec::with_capacity(n);
    for (i, comp) in frame.components.into_iter().enumerate() {
        let entries = quant_tables[comp.tq]
            .ok_or_else(|| Error::parse(0, format!("component {} uses undefined quantization table {}", comp.id, comp.tq)))?;
        let role = if i == 0 { ChannelRole::Luma } else { ChannelRole::Chroma };
        planes.push(QuantizedPlane {
            block_rows: comp.blocks_h,
            block_cols: comp.blocks_w,
            blocks: comp.blocks,
            quant: QuantMatrix::new(entries, role)?,
        });
    }
    let mut it = planes.into_iter();
    let y = it.next().expect("at least one component");
    Ok(QuantizedImage {
        y,
        cb: it.next(),
        cr: it.next(),
        subsampling,
        width: frame.width,
        height: frame.height,
    })
}

/// Parses a baseline JPEG down to its quantized coefficients.
pub fn parse_jpeg(data: &[u8]) -> Result<ParsedJpeg> {
    if data.len() < 2 || data[0] != 0xFF || data[1] != 0xD8 {
        return Err(Error::parse(0, "missing SOI marker"));
    }
    let mut cur = Cursor { data, pos: 2 };
    let mut markers = vec![MarkerInfo {
        offset: 0,
        code: 0xD8,
        name: "SOI".into(),
        length: 0,
    }];
    let mut quant_tables: [Option<[u16; 64]>; 4] = [None; 4];
    let mut huffman = HuffmanSet::empty();
    let mut frame: Option<Frame> = None;
    let mut restart_interval = 0usize;
    let mut scans = 0;
    loop {
        let at = cur.pos;
        if cur.u8()? != 0xFF {
            return Err(Error::parse(at, "expected a marker"));
        }
        let mut code = cur.u8()?;
        while code == 0xFF {
            code = cur.u8()?;
        }
        let offset = cur.pos - 2;
        match code {
            0xD9 => {
                markers.push(MarkerInfo {
                    offset,
                    code,
                    name: "EOI".into(),
                    length: 0,
                });
                break;
            }
            0xD0..=0xD7 | 0x01 => {
                markers.push(MarkerInfo {
                    offset,
                    code,
                    name: marker_name(code),
                    length: 0,
                });
                continue;
            }
            _ => {}
        }
        let (base, payload) = cur.segment()?;
        markers.push(MarkerInfo {
            offset,
            code,
            name: marker_name(code),
            length: payload.len() + 2,
        });
        match code {
            0xDB => parse_dqt(payload, base, &mut quant_tables)?,
            0xC4 => parse_dht(payload, base, &mut huffman)?,
            0xCC => return Err(Error::Unsupported("arithmetic coding unsupported (DAC)".into())),
            0xC0..=0xCF => {
                if frame.is_some() {
                    return Err(Error::parse(offset, "multiple frames"));
                }
                frame = Some(parse_sof(code, payload, base)?);
            }
            0xDD => {
                if payload.len() < 2 {
                    return Err(Error::parse(base, "DRI segment truncated"));
                }
                restart_interval = u16::from_be_bytes([payload[0], payload[1]]) as usize;
            }
            0xDA => {
                let f = frame.as_mut().ok_or_else(|| Error::parse(offset, "SOS before SOF"))?;
                let ns = *payload.first().ok_or_else(|| Error::parse(base, "empty SOS"))? as usize;
                if ns == 0 || ns > 4 || payload.len() < 1 + 2 * ns + 3 {
                    return Err(Error::parse(base, "SOS segment truncated"));
                }
                let mut scan = Vec::with_capacity(ns);
                for s in 0..ns {
                    let id = payload[1 + 2 * s];
                    let ci = f
                        .components
                        .iter()
                        .position(|c| c.id == id)
                        .ok_or_else(|| Error::parse(base + 1 + 2 * s, format!("scan names unknown component {id}")))?;
                    let t = payload[2 + 2 * s];
                    scan.push((ci, t >> 4, t & 0x0F));
                }
                let tail = &payload[1 + 2 * ns..];
                if tail[0] != 0 || tail[1] != 63 || tail[2] != 0 {
                    return Err(Error::Unsupported("spectral selection / successive approximation unsupported".into()));
                }
                let next = decode_scan(data, cur.pos, f, &scan, &huffman, restart_interval)?;
                cur.pos = next;
                scans += 1;
            }
            _ => {} // APPn, COM and anything else: skipped
        }
    }
    let frame = frame.ok_or_else(|| Error::parse(data.len(), "no frame header"))?;
    if scans == 0 {
        return Err(Error::parse(data.len(), "no scan data"));
    }
    let image = to_image(frame, &quant_tables)?;
    Ok(ParsedJpeg {
        image,
        markers,
        quant_tables,
    })
}

pub fn dequantize_plane(plane: &QuantizedPlane) -> CoefficientPlane {
    let mut out = CoefficientPlane::zeros(plane.block_rows, plane.block_cols, plane.quant);
    for r in 0..plane.block_rows {
        for c in 0..plane.block_cols {
            out.set_block(r, c, &dequantize_block(plane.block(r, c), &plane.quant));
        }
    }
    out
}

/// Dequantized coefficient planes plus each component's quantization table,
/// without any pixel reconstruction.
pub fn decode_jpeg_coefficients(data: &[u8]) -> Result<(CoefficientImage, Vec<QuantMatrix>)> {
    let parsed = parse_jpeg(data)?;
    let tables = parsed.image.components().iter().map(|p| p.quant).collect();
    let image = parsed.image.map(|p| Ok(dequantize_plane(p)))?;
    Ok((image, tables))
}

/// Level shift and round half away from zero. Values within 1e-9 of a half
/// level count as exact ties, so float noise from linear resampling in the
/// DCT domain cannot flip a rounding decision.
fn to_sample(v: f64) -> u8 {
    let shifted = v + 128.0;
    let half = shifted.floor() + 0.5;
    let snapped = if (shifted - half).abs() < 1e-9 { half } else { shifted };
    snapped.round().clamp(0.0, 255.0) as u8
}

/// Inverse DCT, level shift and rounding of a whole coefficient plane.
pub fn coefficients_to_pixels(plane: &CoefficientPlane) -> PixelPlane {
    let (w, h) = (plane.width(), plane.height());
    let mut samples = vec![0u8; w * h];
    for r in 0..plane.block_rows {
        for c in 0..plane.block_cols {
            let px = dct_inverse_block(&plane.block(r, c));
            for y in 0..8 {
                for x in 0..8 {
                    samples[(r * 8 + y) * w + c * 8 + x] = to_sample(px[y * 8 + x]);
                }
            }
        }
    }
    PixelPlane::new(w, h, samples).expect("plane size")
}

/// Inverse DCT and chroma upsampling, stopping before color conversion.
/// Returns Y, Cb, Cr planes (or a single gray plane) cropped to the original size.
pub fn coefficient_image_to_ycbcr(image: &CoefficientImage) -> Result<Image> {
    let y = coefficients_to_pixels(&image.y);
    if image.is_gray() {
        return Image::gray(y).crop_at(0, 0, image.width, image.height);
    }
    let mut planes = vec![y];
    for plane in [&image.cb, &image.cr] {
        let plane = plane.as_ref().ok_or_else(|| Error::domain("color image missing a chroma plane"))?;
        let mut px = coefficients_to_pixels(plane);
        if image.subsampling == Subsampling::S420 {
            px = upsample_chroma(&px);
        }
        planes.push(px.crop(planes[0].width(), planes[0].height())?);
    }
    Image::new(planes)?.crop_at(0, 0, image.width, image.height)
}

/// Pixel reconstruction of dequantized planes: inverse DCT, chroma upsampling,
/// color conversion and cropping to the original size.
pub fn coefficient_image_to_pixels(image: &CoefficientImage) -> Result<Image> {
    let ycc = coefficient_image_to_ycbcr(image)?;
    if ycc.is_gray() {
        return Ok(ycc);
    }
    ycbcr_to_rgb(&ycc)
}

pub fn decode_jpeg_pixels(data: &[u8]) -> Result<Image> {
    let (coeffs, _) = decode_jpeg_coefficients(data)?;
    coefficient_image_to_pixels(&coeffs)
}
