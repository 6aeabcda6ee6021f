//! Versioned binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "QGACCKPT"
//! version    u32      (1)
//! stage      u8       0 = regression, 1 = gan
//! config     9 × u32  NetworkConfig fields in declaration order
//! stats      4 × 64 × f64   luma mean, luma std, chroma mean, chroma std
//! count      u32      number of tensors
//! index      count × { name_len u16, name utf-8, dtype u8 (0 = f64),
//!                      shape 4 × u32, offset u64, len u64 }   offsets in elements
//! data       f64 values
//! ```
//!
//! Loading checks every name and shape against the architecture table of the
//! stored config.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use super::config::NetworkConfig;
use super::networks::Qgac;
use crate::coeff::{FrequencyStats, NormalizationStats};
use crate::error::{Error, Result};
use crate::jpeg::ChannelRole;
use crate::nn::ParamStore;

pub const MAGIC: &[u8; 8] = b"QGACCKPT";
pub const FORMAT_VERSION: u32 = 1;
pub const SUPPORTED_VERSIONS: &[u32] = &[1];
const DTYPE_F64: u8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stage {
    #[default]
    Regression,
    Gan,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Regression => "regression",
            Stage::Gan => "gan",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub stage: Stage,
    pub config: NetworkConfig,
    pub stats: NormalizationStats,
    pub params: ParamStore,
}

impl ModelCheckpoint {
    /// Fresh weights; an identity restorer until trained.
    pub fn initialize(config: NetworkConfig, stats: NormalizationStats, seed: u64) -> Result<Self> {
        let params = Qgac::new(config)?.init_params(seed)?;
        Ok(Self {
            stage: Stage::Regression,
            config,
            stats,
            params,
        })
    }

    pub fn model(&self) -> Result<Qgac> {
        Qgac::new(self.config)
    }

    /// Names and shapes must equal the architecture table of `config`.
    pub fn check_architecture(&self) -> Result<()> {
        let arch = self.model()?.architecture();
        let expected: BTreeSet<&str> = arch.iter().map(|s| s.name.as_str()).collect();
        for name in self.params.names() {
            if !expected.contains(name.as_str()) {
                return Err(Error::Checkpoint(format!("unexpected parameter {name}")));
            }
        }
        for spec in &arch {
            let p = self
                .params
                .get(&spec.name)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter {}", spec.name)))?;
            if p.shape != spec.shape {
                return Err(Error::Checkpoint(format!(
                    "parameter {} has shape {:?}, architecture expects {:?}",
                    spec.name, p.shape, spec.shape
                )));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(match self.stage {
            Stage::Regression => 0,
            Stage::Gan => 1,
        });
        for f in self.config.fields() {
            out.extend_from_slice(&(f as u32).to_le_bytes());
        }
        for s in [&self.stats.luma, &self.stats.chroma] {
            for v in s.mean.iter().chain(s.std.iter()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.params.len() as u32).to_le_bytes());
        let mut offset = 0u64;
        for (name, p) in self.params.iter() {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(DTYPE_F64);
            for d in p.shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            out.extend_from_slice(&offset.to_le_bytes());
            out.extend_from_slice(&(p.data.len() as u64).to_le_bytes());
            offset += p.data.len() as u64;
        }
        for (_, p) in self.params.iter() {
            for v in &p.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
        }
        let version = r.u32()?;
        if !SUPPORTED_VERSIONS.contains(&version) {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {version}; supported versions: {SUPPORTED_VERSIONS:?}"
            )));
        }
        let stage = match r.u8()? {
            0 => Stage::Regression,
            1 => Stage::Gan,
            s => return Err(Error::Checkpoint(format!("unknown stage tag {s}"))),
        };
        let mut fields = [0usize; 9];
        for f in &mut fields {
            *f = r.u32()? as usize;
        }
        let config = NetworkConfig::from_fields(fields);
        config.validate().map_err(|e| Error::Checkpoint(format!("stored config invalid: {e}")))?;
        let mut stats = Vec::new();
        for role in [ChannelRole::Luma, ChannelRole::Chroma] {
            let mut mean = [0.0; 64];
            let mut std = [0.0; 64];
            for v in mean.iter_mut().chain(std.iter_mut()) {
                *v = r.f64()?;
            }
            stats.push(FrequencyStats::new(role, mean, std).map_err(|e| Error::Checkpoint(format!("stats: {e}")))?);
        }
        let chroma = stats.pop().expect("two roles");
        let luma = stats.pop().expect("two roles");

        let count = r.u32()? as usize;
        let mut index = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::Checkpoint("parameter name is not utf-8".into()))?
                .to_string();
            let dtype = r.u8()?;
            if dtype != DTYPE_F64 {
                return Err(Error::Checkpoint(format!("parameter {name}: unknown dtype {dtype}")));
            }
            let mut shape = [0usize; 4];
            for d in &mut shape {
                *d = r.u32()? as usize;
            }
            let offset = r.u64()? as usize;
            let n = r.u64()? as usize;
            if n != shape.iter().product::<usize>() {
                return Err(Error::Checkpoint(format!("parameter {name}: {n} values for shape {shape:?}")));
            }
            index.push((name, shape, offset, n));
        }
        let data = &bytes[r.pos..];
        if data.len() % 8 != 0 {
            return Err(Error::Checkpoint(format!("data section of {} bytes is not whole f64 values", data.len())));
        }
        let total = data.len() / 8;
        let mut params = ParamStore::new();
        for (name, shape, offset, n) in index {
            let end = offset.checked_add(n).filter(|&e| e <= total).ok_or_else(|| {
                Error::Checkpoint(format!("parameter {name} [{offset}, +{n}) runs past the {total} stored values (truncated file?)"))
            })?;
            let values = data[offset * 8..end * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            params.insert(name, shape, values).map_err(|e| Error::Checkpoint(e.to_string()))?;
        }
        let ckpt = Self {
            stage,
            config,
            stats: NormalizationStats { luma, chroma },
            params,
        };
        ckpt.check_architecture()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_checkpoint(self, std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        load_checkpoint(std::fs::File::open(path)?)
    }
}

pub fn save_checkpoint(ckpt: &ModelCheckpoint, mut sink: impl Write) -> Result<()> {
    sink.write_all(&ckpt.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(mut source: impl Read) -> Result<ModelCheckpoint> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    ModelCheckpoint::from_bytes(&bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Checkpoint(format!("truncated checkpoint: need {n} bytes at offset {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// `(1 − α)·a + α·b` for every parameter. Stats are taken from `a` and must
/// equal those of `b`; the stage tag follows the nearer endpoint.
pub fn interpolate_params(a: &ModelCheckpoint, b: &ModelCheckpoint, alpha: f64) -> Result<ModelCheckpoint> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha {alpha} outside [0, 1]")));
    }
    if a.config != b.config {
        return Err(Error::Checkpoint("checkpoints have different network configs".into()));
    }
    if a.stats != b.stats {
        return Err(Error::Checkpoint("checkpoints have different normalization stats".into()));
    }
    if a.params.len() != b.params.len() {
        return Err(Error::Checkpoint(format!(
            "parameter counts differ: {} vs {}",
            a.params.len(),
            b.params.len()
        )));
    }
    let mut params = ParamStore::new();
    for (name, pa) in a.params.iter() {
        let pb = b
            .params
            .get(name)
            .ok_or_else(|| Error::Checkpoint(format!("parameter {name} missing from second checkpoint")))?;
        if pa.shape != pb.shape {
            return Err(Error::Checkpoint(format!(
                "parameter {name} has shapes {:?} and {:?}",
                pa.shape, pb.shape
            )));
        }
        // endpoints are copied so that signed zeros and the like survive bit-exactly
        let data = if alpha == 0.0 {
            pa.data.clone()
        } else if alpha == 1.0 {
            pb.data.clone()
        } else {
            pa.data.iter().zip(&pb.data).map(|(&x, &y)| if x == y { x } else { (1.0 - alpha) * x + alpha * y }).collect()
        };
        params.insert(name.clone(), pa.shape, data)?;
    }
    Ok(ModelCheckpoint {
        stage: if alpha < 0.5 { a.stage } else { b.stage },
        config: a.config,
        stats: a.stats.clone(),
        params,
    })
}
