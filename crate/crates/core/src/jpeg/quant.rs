use super::tables::{BASE_CHROMA_QUANT, BASE_LUMA_QUANT};
use super::types::{ChannelRole, CoefficientBlock, QuantMatrix};
use crate::error::{Error, Result};

/// How real coefficients are mapped to integers during quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum QuantRounding {
    /// Round toward zero.
    #[default]
    Truncate,
    /// Round half away from zero, as libjpeg's forward quantizer does.
    Nearest,
}

impl std::str::FromStr for QuantRounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncate" | "trunc" => Ok(Self::Truncate),
            "nearest" | "round" => Ok(Self::Nearest),
            other => Err(Error::Config(format!("unknown rounding '{other}' (use truncate or nearest)"))),
        }
    }
}

fn scale_table(base: &[u16; 64], quality: u8) -> [u16; 64] {
    let q = quality as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u16; 64];
    for (o, &b) in out.iter_mut().zip(base) {
        *o = ((b as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    out
}

/// libjpeg's quality scaling of the Annex K tables (with forced baseline clamp).
pub fn quality_to_tables(quality: u8) -> Result<(QuantMatrix, QuantMatrix)> {
    if !(1..=100).contains(&quality) {
        return Err(Error::domain(format!("quality {quality} outside [1, 100]")));
    }
    Ok((
        QuantMatrix::new(scale_table(&BASE_LUMA_QUANT, quality), ChannelRole::Luma)?,
        QuantMatrix::new(scale_table(&BASE_CHROMA_QUANT, quality), ChannelRole::Chroma)?,
    ))
}

/// Quotients within this distance of an integer are treated as that integer,
/// so float noise from the DCT cannot flip an exact multiple across a
/// truncation boundary.
const SNAP: f64 = 1e-9;

#[inline]
pub fn quantize_value(coeff: f64, divisor: u16, rounding: QuantRounding) -> i32 {
    let v = coeff / divisor as f64;
    let nearest = v.round();
    if (v - nearest).abs() < SNAP {
        return nearest as i32;
    }
    match rounding {
        QuantRounding::Truncate => v.trunc() as i32,
        QuantRounding::Nearest => nearest as i32,
    }
}

pub fn quantize_block(coeffs: &[f64; 64], q: &QuantMatrix) -> CoefficientBlock {
    quantize_block_with(coeffs, q, QuantRounding::Truncate)
}

pub fn quantize_block_with(coeffs: &[f64; 64], q: &QuantMatrix, rounding: QuantRounding) -> CoefficientBlock {
    let mut out = [0i32; 64];
    for k in 0..64 {
        out[k] = quantize_value(coeffs[k], q.entries()[k], rounding);
    }
    CoefficientBlock(out)
}

pub fn dequantize_block(block: &CoefficientBlock, q: &QuantMatrix) -> [f64; 64] {
    let mut out = [0.0; 64];
    for k in 0..64 {
        out[k] = block.0[k] as f64 * q.entries()[k] as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quality_50_is_base() {
        let (l, c) = quality_to_tables(50).unwrap();
        assert_eq!(l.entries(), &BASE_LUMA_QUANT);
        assert_eq!(c.entries(), &BASE_CHROMA_QUANT);
    }

    #[test]
    fn quality_100_is_all_ones() {
        let (l, c) = quality_to_tables(100).unwrap();
        assert!(l.entries().iter().chain(c.entries()).all(|&e| e == 1));
    }

    #[test]
    fn quality_10_luma_dc() {
        assert_eq!(quality_to_tables(10).unwrap().0.dc(), 80);
    }

    #[test]
    fn quality_bounds() {
        assert!(quality_to_tables(0).is_err());
        assert!(quality_to_tables(101).is_err());
        assert_eq!(quality_to_tables(1).unwrap().0.dc(), 255);
    }

    #[test]
    fn truncation_examples() {
        let q = QuantMatrix::uniform(16, ChannelRole::Luma).unwrap();
        let mut c = [0.0; 64];
        c[0] = 17.0;
        c[1] = -17.0;
        c[2] = -15.9;
        let b = quantize_block(&c, &q);
        assert_eq!(&b.0[..3], &[1, -1, 0]);
        let d = dequantize_block(&b, &q);
        assert_eq!(&d[..3], &[16.0, -16.0, 0.0]);
    }

    #[test]
    fn unit_divisors_are_identity_on_integers() {
        let q = QuantMatrix::uniform(1, ChannelRole::Luma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c = [0.0; 64];
        c.iter_mut().for_each(|v| *v = rng.gen_range(-1024i32..1024) as f64);
        let b = quantize_block(&c, &q);
        assert_eq!(dequantize_block(&b, &q), c);
    }

    #[test]
    fn second_quantization_pass_is_identity() {
        let (l, _) = quality_to_tables(37).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut c = [0.0; 64];
            c.iter_mut().for_each(|v| *v = rng.gen_range(-1000.0..1000.0));
            let once = dequantize_block(&quantize_block(&c, &l), &l);
            let twice = dequantize_block(&quantize_block(&once, &l), &l);
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn nearest_rounding() {
        assert_eq!(quantize_value(24.0, 16, QuantRounding::Nearest), 2);
        assert_eq!(quantize_value(-24.0, 16, QuantRounding::Nearest), -2);
        assert_eq!(quantize_value(-23.9, 16, QuantRounding::Nearest), -1);
        assert_eq!(quantize_value(-23.9, 16, QuantRounding::Truncate), -1);
    }

    #[test]
    fn float_noise_does_not_flip_exact_multiples() {
        assert_eq!(quantize_value(-223.99999999999997, 16, QuantRounding::Truncate), -14);
        assert_eq!(quantize_value(31.999999999999996, 16, QuantRounding::Truncate), 2);
    }
}
