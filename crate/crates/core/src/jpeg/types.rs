use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelRole {
    Luma,
    Chroma,
}

/// An 8×8 table of quantization divisors in raster order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantMatrix {
    entries: [u16; 64],
    role: ChannelRole,
}

impl QuantMatrix {
    pub fn new(entries: [u16; 64], role: ChannelRole) -> Result<Self> {
        if let Some(pos) = entries.iter().position(|&e| !(1..=255).contains(&e)) {
            return Err(Error::domain(format!(
                "quantization entry {} at index {pos} outside [1, 255]",
                entries[pos]
            )));
        }
        Ok(Self { entries, role })
    }

    /// Table with every divisor equal to `value`.
    pub fn uniform(value: u16, role: ChannelRole) -> Result<Self> {
        Self::new([value; 64], role)
    }

    pub fn entries(&self) -> &[u16; 64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.entries[row * 8 + col]
    }

    pub fn dc(&self) -> u16 {
        self.entries[0]
    }

    pub fn role(&self) -> ChannelRole {
        self.role
    }

    pub fn with_role(mut self, role: ChannelRole) -> Self {
        self.role = role;
        self
    }
}

/// A single 8-bit sample plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelPlane {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl PixelPlane {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::domain(format!(
                "plane {width}x{height} needs {} samples, got {}",
                width * height,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            samples: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    /// Top-left `width × height` region.
    pub fn crop(&self, width: usize, height: usize) -> Result<Self> {
        self.crop_at(0, 0, width, height)
    }

    pub fn crop_at(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::domain(format!(
                "crop {width}x{height}+{x0}+{y0} exceeds plane {}x{}",
                self.width, self.height
            )));
        }
        Ok(Self::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y)))
    }
}

/// A planar 8-bit image with one (gray) or three (RGB or YCbCr) planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    planes: Vec<PixelPlane>,
}

impl Image {
    pub fn new(planes: Vec<PixelPlane>) -> Result<Self> {
        match planes.len() {
            1 | 3 => {}
            n => return Err(Error::domain(format!("image needs 1 or 3 planes, got {n}"))),
        }
        let (w, h) = (planes[0].width, planes[0].height);
        if planes.iter().any(|p| p.width != w || p.height != h) {
            return Err(Error::domain("image planes differ in size"));
        }
        Ok(Self { planes })
    }

    pub fn gray(plane: PixelPlane) -> Self {
        Self {
            planes: vec![plane],
        }
    }

    /// Builds an RGB image from interleaved samples.
    pub fn from_interleaved(width: usize, height: usize, channels: usize, data: &[u8]) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::domain("interleaved buffer size does not match dimensions"));
        }
        let planes = (0..channels)
            .map(|c| PixelPlane::new(width, height, data.iter().skip(c).step_by(channels).copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(planes)
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let n = self.width() * self.height();
        let c = self.planes.len();
        let mut out = vec![0u8; n * c];
        for (ci, plane) in self.planes.iter().enumerate() {
            for (i, &s) in plane.samples.iter().enumerate() {
                out[i * c + ci] = s;
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn is_gray(&self) -> bool {
        self.planes.len() == 1
    }

    pub fn planes(&self) -> &[PixelPlane] {
        &self.planes
    }

    pub fn plane(&self, i: usize) -> &PixelPlane {
        &self.planes[i]
    }

    pub fn into_planes(self) -> Vec<PixelPlane> {
        self.planes
    }

    pub fn crop_at(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        let planes = self
            .planes
            .iter()
            .map(|p| p.crop_at(x0, y0, width, height))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { planes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsampling {
    /// Full-resolution chroma.
    S444,
    /// Chroma halved in both axes.
    S420,
}

impl Subsampling {
    /// Pixel size of the minimum coded unit.
    pub fn mcu_size(self) -> usize {
        match self {
            Subsampling::S444 => 8,
            Subsampling::S420 => 16,
        }
    }
}

impl std::str::FromStr for Subsampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "444" | "4:4:4" => Ok(Subsampling::S444),
            "420" | "4:2:0" => Ok(Subsampling::S420),
            other => Err(Error::Config(format!("unknown subsampling '{other}' (use 444 or 420)"))),
        }
    }
}

impl std::fmt::Display for Subsampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Subsampling::S444 => "4:4:4",
            Subsampling::S420 => "4:2:0",
        })
    }
}

/// Quantized coefficients of one 8×8 block, raster order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoefficientBlock(pub [i32; 64]);

impl Default for CoefficientBlock {
    fn default() -> Self {
        Self([0; 64])
    }
}

/// Block grid of quantized coefficients for one component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedPlane {
    pub block_rows: usize,
    pub block_cols: usize,
    pub blocks: Vec<CoefficientBlock>,
    pub quant: QuantMatrix,
}

impl QuantizedPlane {
    pub fn zeros(block_rows: usize, block_cols: usize, quant: QuantMatrix) -> Self {
        Self {
            block_rows,
            block_cols,
            blocks: vec![CoefficientBlock::default(); block_rows * block_cols],
            quant,
        }
    }

    pub fn block(&self, row: usize, col: usize) -> &CoefficientBlock {
        &self.blocks[row * self.block_cols + col]
    }

    pub fn block_mut(&mut self, row: usize, col: usize) -> &mut CoefficientBlock {
        &mut self.blocks[row * self.block_cols + col]
    }
}

/// Dequantized DCT coefficients laid out spatially: coefficient `(u, v)` of
/// block `(r, c)` lives at row `8r + u`, column `8c + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPlane {
    pub block_rows: usize,
    pub block_cols: usize,
    pub values: Vec<f64>,
    pub quant: QuantMatrix,
}

impl CoefficientPlane {
    pub fn zeros(block_rows: usize, block_cols: usize, quant: QuantMatrix) -> Self {
        Self {
            block_rows,
            block_cols,
            values: vec![0.0; block_rows * block_cols * 64],
            quant,
        }
    }

    pub fn from_values(height: usize, width: usize, values: Vec<f64>, quant: QuantMatrix) -> Result<Self> {
        if height % 8 != 0 || width % 8 != 0 || height == 0 || width == 0 {
            return Err(Error::domain(format!(
                "coefficient plane {width}x{height} is not a positive multiple of 8"
            )));
        }
        if values.len() != width * height {
            return Err(Error::domain("coefficient count does not match plane size"));
        }
        Ok(Self {
            block_rows: height / 8,
            block_cols: width / 8,
            values,
            quant,
        })
    }

    pub fn width(&self) -> usize {
        self.block_cols * 8
    }

    pub fn height(&self) -> usize {
        self.block_rows * 8
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width() + col]
    }

    /// Copies block `(r, c)` out in raster order.
    pub fn block(&self, r: usize, c: usize) -> [f64; 64] {
        let w = self.width();
        let mut out = [0.0; 64];
        for u in 0..8 {
            let base = (r * 8 + u) * w + c * 8;
            out[u * 8..u * 8 + 8].copy_from_slice(&self.values[base..base + 8]);
        }
        out
    }

    pub fn set_block(&mut self, r: usize, c: usize, block: &[f64; 64]) {
        let w = self.width();
        for u in 0..8 {
            let base = (r * 8 + u) * w + c * 8;
            self.values[base..base + 8].copy_from_slice(&block[u * 8..u * 8 + 8]);
        }
    }
}

/// A decoded or to-be-encoded JPEG at coefficient level, generic over the
/// plane representation.
#[derive(Debug, Clone, PartialEq)]
pub struct JpegImage<P> {
    pub y: P,
    pub cb: Option<P>,
    pub cr: Option<P>,
    pub subsampling: Subsampling,
    /// Dimensions before padding.
    pub width: usize,
    pub height: usize,
}

pub type QuantizedImage = JpegImage<QuantizedPlane>;
pub type CoefficientImage = JpegImage<CoefficientPlane>;

impl<P> JpegImage<P> {
    pub fn is_gray(&self) -> bool {
        self.cb.is_none()
    }

    pub fn components(&self) -> Vec<&P> {
        let mut out = vec![&self.y];
        out.extend(self.cb.iter());
        out.extend(self.cr.iter());
        out
    }

    pub fn map<Q>(&self, mut f: impl FnMut(&P) -> Result<Q>) -> Result<JpegImage<Q>> {
        Ok(JpegImage {
            y: f(&self.y)?,
            cb: self.cb.as_ref().map(&mut f).transpose()?,
            cr: self.cr.as_ref().map(&mut f).transpose()?,
            subsampling: self.subsampling,
            width: self.width,
            height: self.height,
        })
    }
}
