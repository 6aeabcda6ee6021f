//! Baseline sequential entropy coding: DC prediction, (run, size) AC
//! symbols with ZRL/EOB, and MCU interleaving.

use super::huffman::{extend, magnitude_bits, size_category, BitReader, BitWriter, HuffmanSet, HuffmanTable, TableClass};
use super::types::{CoefficientBlock, QuantMatrix, QuantizedImage, QuantizedPlane, Subsampling};
use super::zigzag::ZIGZAG;
use crate::error::{Error, Result};

/// One component taking part in a scan: its block grid, sampling factors and
/// the Huffman table ids it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanComponent {
    pub h: usize,
    pub v: usize,
    pub dc_table: u8,
    pub ac_table: u8,
}

/// Block positions of a scan in coding order: `(component index, block row, block col)`
/// grouped per MCU.
pub(crate) fn mcu_order(
    comps: &[ScanComponent],
    mcu_cols: usize,
    mcu_rows: usize,
    single_blocks: Option<(usize, usize)>,
) -> Vec<Vec<(usize, usize, usize)>> {
    if let Some((rows, cols)) = single_blocks {
        // a non-interleaved scan codes one block per MCU in raster order
        return (0..rows)
            .flat_map(|r| (0..cols).map(move |c| vec![(0, r, c)]))
            .collect();
    }
    let mut out = Vec::with_capacity(mcu_cols * mcu_rows);
    for my in 0..mcu_rows {
        for mx in 0..mcu_cols {
            let mut mcu = Vec::new();
            for (ci, comp) in comps.iter().enumerate() {
                for by in 0..comp.v {
                    for bx in 0..comp.h {
                        mcu.push((ci, my * comp.v + by, mx * comp.h + bx));
                    }
                }
            }
            out.push(mcu);
        }
    }
    out
}

fn encode_block(
    w: &mut BitWriter,
    block: &CoefficientBlock,
    pred: &mut i32,
    dc: &HuffmanTable,
    ac: &HuffmanTable,
) -> Result<()> {
    // baseline AC symbols stop at size 10, so -1024 is only codable as DC
    if !(-1024..=1023).contains(&block.0[0]) {
        return Err(Error::domain(format!("DC coefficient {} outside -1024..=1023", block.0[0])));
    }
    if let Some(v) = block.0[1..].iter().find(|v| !(-1023..=1023).contains(*v)) {
        return Err(Error::domain(format!("AC coefficient {v} outside -1023..=1023")));
    }
    let diff = block.0[0] - *pred;
    *pred = block.0[0];
    let size = size_category(diff);
    let (code, len) = dc
        .code(size)
        .ok_or_else(|| Error::Encode(format!("DC size category {size} missing from table {}", dc.id)))?;
    w.put(code as u32, len);
    w.put(magnitude_bits(diff, size), size);

    let emit = |w: &mut BitWriter, symbol: u8| -> Result<()> {
        let (code, len) = ac
            .code(symbol)
            .ok_or_else(|| Error::Encode(format!("AC symbol {symbol:#04x} missing from table {}", ac.id)))?;
        w.put(code as u32, len);
        Ok(())
    };
    let mut run = 0u8;
    for k in 1..64 {
        let v = block.0[ZIGZAG[k]];
        if v == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            emit(w, 0xF0)?;
            run -= 16;
        }
        let size = size_category(v);
        emit(w, (run << 4) | size)?;
        w.put(magnitude_bits(v, size), size);
        run = 0;
    }
    if run > 0 {
        emit(w, 0x00)?;
    }
    Ok(())
}

/// Layout of the scan the encoder writes for `image`.
pub(crate) fn scan_layout(image: &QuantizedImage) -> (Vec<ScanComponent>, usize, usize, Option<(usize, usize)>) {
    if image.is_gray() {
        let comp = ScanComponent {
            h: 1,
            v: 1,
            dc_table: 0,
            ac_table: 0,
        };
        return (vec![comp], 0, 0, Some((image.y.block_rows, image.y.block_cols)));
    }
    let luma = match image.subsampling {
        Subsampling::S444 => 1,
        Subsampling::S420 => 2,
    };
    let comps = vec![
        ScanComponent {
            h: luma,
            v: luma,
            dc_table: 0,
            ac_table: 0,
        },
        ScanComponent {
            h: 1,
            v: 1,
            dc_table: 1,
            ac_table: 1,
        },
        ScanComponent {
            h: 1,
            v: 1,
            dc_table: 1,
            ac_table: 1,
        },
    ];
    let cb = image.cb.as_ref().expect("color image");
    (comps, cb.block_cols, cb.block_rows, None)
}

/// Entropy-codes all blocks of `image` as one baseline scan (without the SOS
/// header). The output is byte-stuffed and padded with 1-bits.
pub fn entropy_encode_scan(image: &QuantizedImage, tables: &HuffmanSet) -> Result<Vec<u8>> {
    let planes = image.components();
    if !image.is_gray() && image.cr.is_none() {
        return Err(Error::domain("color image is missing the Cr plane"));
    }
    let (comps, mcu_cols, mcu_rows, single) = scan_layout(image);
    for (comp, plane) in comps.iter().zip(&planes) {
        if single.is_none()
            && (plane.block_cols != mcu_cols * comp.h || plane.block_rows != mcu_rows * comp.v)
        {
            return Err(Error::domain("component block grids are inconsistent with the subsampling"));
        }
    }
    let lookup = |class, id| {
        tables
            .get(class, id)
            .ok_or_else(|| Error::Encode(format!("no {class:?} Huffman table with id {id}")))
    };
    let mut w = BitWriter::new();
    let mut preds = vec![0i32; comps.len()];
    for mcu in mcu_order(&comps, mcu_cols, mcu_rows, single) {
        for (ci, r, c) in mcu {
            let comp = &comps[ci];
            let dc = lookup(TableClass::Dc, comp.dc_table)?;
            let ac = lookup(TableClass::Ac, comp.ac_table)?;
            encode_block(&mut w, planes[ci].block(r, c), &mut preds[ci], dc, ac)?;
        }
    }
    Ok(w.finish())
}

pub(crate) fn decode_block(
    reader: &mut BitReader<'_>,
    pred: &mut i32,
    dc: &HuffmanTable,
    ac: &HuffmanTable,
) -> Result<CoefficientBlock> {
    let mut block = [0i32; 64];
    let size = dc.decode(reader)?;
    if size > 11 {
        return Err(Error::parse(reader.offset(), format!("DC size category {size} > 11")));
    }
    let diff = extend(reader.bits(size)?, size);
    *pred += diff;
    block[0] = *pred;
    let mut k = 1;
    while k < 64 {
        let rs = ac.decode(reader)?;
        let (run, size) = ((rs >> 4) as usize, rs & 0x0F);
        if size == 0 {
            if run == 15 {
                k += 16;
                continue;
            }
            break;
        }
        k += run;
        if k > 63 {
            return Err(Error::parse(reader.offset(), "AC run extends past the end of the block"));
        }
        block[ZIGZAG[k]] = extend(reader.bits(size)?, size);
        k += 1;
    }
    if k > 64 {
        return Err(Error::parse(reader.offset(), "zero run extends past the end of the block"));
    }
    Ok(CoefficientBlock(block))
}

/// Geometry the decoder needs to interpret a scan produced by
/// [`entropy_encode_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanDims {
    pub width: usize,
    pub height: usize,
    pub subsampling: Subsampling,
    pub gray: bool,
}

/// Inverse of [`entropy_encode_scan`]. `quant` supplies the luma and chroma
/// tables attached to the returned planes.
pub fn entropy_decode_scan(
    bytes: &[u8],
    tables: &HuffmanSet,
    dims: ScanDims,
    quant: (QuantMatrix, QuantMatrix),
) -> Result<QuantizedImage> {
    if dims.width == 0 || dims.height == 0 {
        return Err(Error::domain("scan dimensions must be positive"));
    }
    let (mcu, sub) = if dims.gray {
        (8, Subsampling::S444)
    } else {
        (dims.subsampling.mcu_size(), dims.subsampling)
    };
    let mcu_cols = dims.width.div_ceil(mcu);
    let mcu_rows = dims.height.div_ceil(mcu);
    let luma_blocks = mcu / 8;
    let mut image = QuantizedImage {
        y: QuantizedPlane::zeros(mcu_rows * luma_blocks, mcu_cols * luma_blocks, quant.0),
        cb: (!dims.gray).then(|| QuantizedPlane::zeros(mcu_rows, mcu_cols, quant.1)),
        cr: (!dims.gray).then(|| QuantizedPlane::zeros(mcu_rows, mcu_cols, quant.1)),
        subsampling: sub,
        width: dims.width,
        height: dims.height,
    };
    let (comps, mc, mr, single) = scan_layout(&image);
    let mut reader = BitReader::new(bytes, 0);
    let mut preds = vec![0i32; comps.len()];
    for mcu in mcu_order(&comps, mc, mr, single) {
        for (ci, r, c) in mcu {
            let comp = comps[ci];
            let dc = tables
                .get(TableClass::Dc, comp.dc_table)
                .ok_or_else(|| Error::parse(0, format!("missing DC table {}", comp.dc_table)))?;
            let ac = tables
                .get(TableClass::Ac, comp.ac_table)
                .ok_or_else(|| Error::parse(0, format!("missing AC table {}", comp.ac_table)))?;
            let block = decode_block(&mut reader, &mut preds[ci], dc, ac)?;
            let plane = match ci {
                0 => &mut image.y,
                1 => image.cb.as_mut().expect("color"),
                _ => image.cr.as_mut().expect("color"),
            };
            *plane.block_mut(r, c) = block;
        }
    }
    Ok(image)
}
