//! Canonical Huffman tables (T.81 Annex C) and the bit-level I/O used by
//! the entropy coder.

use super::tables::*;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableClass {
    Dc,
    Ac,
}

/// A Huffman table as stored in a DHT segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    pub class: TableClass,
    pub id: u8,
    /// Number of codes of each length 1..=16.
    pub bits: [u8; 16],
    pub values: Vec<u8>,
    /// (code, length) per symbol value; length 0 means absent.
    encode: Box<[(u16, u8); 256]>,
    /// Annex F.2.2.3 decoding tables indexed by code length 1..=16.
    maxcode: [i32; 17],
    valptr: [i32; 17],
    mincode: [i32; 17],
}

impl HuffmanTable {
    pub fn new(class: TableClass, id: u8, bits: [u8; 16], values: Vec<u8>) -> Result<Self> {
        if id > 3 {
            return Err(Error::domain(format!("Huffman table id {id} > 3")));
        }
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total > 256 {
            return Err(Error::domain(format!(
                "Huffman table declares {total} codes but has {} values",
                values.len()
            )));
        }
        let mut encode = Box::new([(0u16, 0u8); 256]);
        let mut maxcode = [-1i32; 17];
        let mut valptr = [0i32; 17];
        let mut mincode = [0i32; 17];
        let mut code: u32 = 0;
        let mut k = 0usize;
        for len in 1..=16usize {
            let n = bits[len - 1] as usize;
            if n > 0 {
                valptr[len] = k as i32;
                mincode[len] = code as i32;
                for _ in 0..n {
                    if code >= (1 << len) {
                        return Err(Error::domain("Huffman code lengths overflow the code space"));
                    }
                    let sym = values[k] as usize;
                    if encode[sym].1 != 0 {
                        return Err(Error::domain(format!("Huffman symbol {sym:#04x} listed twice")));
                    }
                    encode[sym] = (code as u16, len as u8);
                    code += 1;
                    k += 1;
                }
                maxcode[len] = code as i32 - 1;
            }
            code <<= 1;
        }
        // the all-ones code of the longest length is reserved
        if let Some(longest) = (1..=16).rev().find(|&l| bits[l - 1] > 0) {
            if maxcode[longest] == (1i32 << longest) - 1 {
                return Err(Error::domain("Huffman table assigns the reserved all-ones code"));
            }
        }
        Ok(Self {
            class,
            id,
            bits,
            values,
            encode,
            maxcode,
            valptr,
            mincode,
        })
    }

    pub fn std_dc_luma() -> Self {
        Self::new(TableClass::Dc, 0, DC_LUMA_BITS, DC_LUMA_VALUES.to_vec()).expect("standard table")
    }

    pub fn std_ac_luma() -> Self {
        Self::new(TableClass::Ac, 0, AC_LUMA_BITS, AC_LUMA_VALUES.to_vec()).expect("standard table")
    }

    pub fn std_dc_chroma() -> Self {
        Self::new(TableClass::Dc, 1, DC_CHROMA_BITS, DC_CHROMA_VALUES.to_vec()).expect("standard table")
    }

    pub fn std_ac_chroma() -> Self {
        Self::new(TableClass::Ac, 1, AC_CHROMA_BITS, AC_CHROMA_VALUES.to_vec()).expect("standard table")
    }

    /// `(code, length)` for a symbol, if the table contains it.
    pub fn code(&self, symbol: u8) -> Option<(u16, u8)> {
        let (c, l) = self.encode[symbol as usize];
        (l > 0).then_some((c, l))
    }

    /// All assigned (symbol, code, length) triples.
    pub fn codes(&self) -> Vec<(u8, u16, u8)> {
        self.values
            .iter()
            .map(|&s| {
                let (c, l) = self.encode[s as usize];
                (s, c, l)
            })
            .collect()
    }

    pub(crate) fn decode(&self, reader: &mut BitReader<'_>) -> Result<u8> {
        let mut code: i32 = 0;
        for len in 1..=16 {
            code = (code << 1) | reader.bit()? as i32;
            if code <= self.maxcode[len] {
                let idx = self.valptr[len] + code - self.mincode[len];
                return Ok(self.values[idx as usize]);
            }
        }
        Err(Error::parse(reader.offset(), "invalid Huffman code"))
    }
}

/// The four tables used by the encoder: luma DC/AC (id 0), chroma DC/AC (id 1).
#[derive(Debug, Clone)]
pub struct HuffmanSet {
    pub dc: [Option<HuffmanTable>; 4],
    pub ac: [Option<HuffmanTable>; 4],
}

impl HuffmanSet {
    pub fn empty() -> Self {
        Self {
            dc: Default::default(),
            ac: Default::default(),
        }
    }

    pub fn standard() -> Self {
        let mut set = Self::empty();
        set.insert(HuffmanTable::std_dc_luma());
        set.insert(HuffmanTable::std_ac_luma());
        set.insert(HuffmanTable::std_dc_chroma());
        set.insert(HuffmanTable::std_ac_chroma());
        set
    }

    pub fn insert(&mut self, table: HuffmanTable) {
        let id = table.id as usize;
        match table.class {
            TableClass::Dc => self.dc[id] = Some(table),
            TableClass::Ac => self.ac[id] = Some(table),
        }
    }

    pub fn get(&self, class: TableClass, id: u8) -> Option<&HuffmanTable> {
        match class {
            TableClass::Dc => self.dc.get(id as usize)?.as_ref(),
            TableClass::Ac => self.ac.get(id as usize)?.as_ref(),
        }
    }
}

/// MSB-first bit writer with 0xFF byte stuffing.
#[derive(Debug, Default)]
pub struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, bits: u32, len: u8) {
        debug_assert!(len <= 24);
        if len == 0 {
            return;
        }
        self.acc = (self.acc << len) | (bits & ((1u32 << len) - 1));
        self.nbits += len as u32;
        while self.nbits >= 8 {
            let byte = (self.acc >> (self.nbits - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.nbits -= 8;
            self.acc &= (1u32 << self.nbits) - 1;
        }
    }

    /// Pads the final partial byte with 1-bits.
    pub fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits as u8;
            self.put((1u32 << pad) - 1, pad);
        }
        self.out
    }
}

/// MSB-first reader over entropy-coded data. Stops at any marker; reading
/// past it is a parse error rather than implicit zero padding.
#[derive(Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    /// Absolute offset of `data[0]` in the file, for error reporting.
    base: usize,
    pos: usize,
    acc: u32,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8], base: usize) -> Self {
        Self {
            data,
            base,
            pos: 0,
            acc: 0,
            nbits: 0,
        }
    }

    pub fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn fill_byte(&mut self) -> Result<()> {
        let Some(&b) = self.data.get(self.pos) else {
            return Err(Error::parse(self.offset(), "entropy-coded data truncated"));
        };
        if b == 0xFF {
            match self.data.get(self.pos + 1) {
                Some(0x00) => {
                    self.pos += 2;
                }
                Some(_) => return Err(Error::parse(self.offset(), "marker reached inside entropy-coded block")),
                None => return Err(Error::parse(self.offset(), "entropy-coded data truncated")),
            }
        } else {
            self.pos += 1;
        }
        self.acc = (self.acc << 8) | b as u32;
        self.nbits += 8;
        Ok(())
    }

    pub fn bit(&mut self) -> Result<u32> {
        if self.nbits == 0 {
            self.fill_byte()?;
        }
        self.nbits -= 1;
        let bit = (self.acc >> self.nbits) & 1;
        self.acc &= (1u32 << self.nbits) - 1;
        Ok(bit)
    }

    pub fn bits(&mut self, n: u8) -> Result<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    /// Drops buffered bits (byte alignment before a restart marker).
    pub fn align(&mut self) {
        self.acc = 0;
        self.nbits = 0;
    }

    /// Position of the next unread byte relative to `data`.
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn seek(&mut self, pos: usize) {
        self.pos = pos;
        self.align();
    }
}

/// Number of bits needed for `|v|` (the JPEG size category).
#[inline]
pub fn size_category(v: i32) -> u8 {
    (32 - v.unsigned_abs().leading_zeros()) as u8
}

/// Low `size` bits representing `v`: ones' complement for negatives.
#[inline]
pub fn magnitude_bits(v: i32, size: u8) -> u32 {
    if v < 0 {
        ((v - 1) as u32) & ((1u32 << size) - 1)
    } else {
        v as u32
    }
}

/// Inverse of [`magnitude_bits`] (T.81 F.2.2.1 EXTEND).
#[inline]
pub fn extend(bits: u32, size: u8) -> i32 {
    if size == 0 {
        return 0;
    }
    if bits < (1u32 << (size - 1)) {
        bits as i32 - (1i32 << size) + 1
    } else {
        bits as i32
    }
}
