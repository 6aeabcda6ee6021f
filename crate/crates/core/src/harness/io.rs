//! Lossless image I/O (PNG and binary PPM) and directory listing.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::jpeg::{Image, PixelPlane};

/// Reads a PNG or PPM/PGM file. Gray files yield a one-plane image; alpha is dropped.
pub fn read_image(path: &Path) -> Result<Image> {
    let dynamic = image::open(path)?;
    if dynamic.color().has_color() {
        let rgb = dynamic.to_rgb8();
        Image::from_interleaved(rgb.width() as usize, rgb.height() as usize, 3, rgb.as_raw())
    } else {
        let gray = dynamic.to_luma8();
        let (w, h) = (gray.width() as usize, gray.height() as usize);
        Ok(Image::gray(PixelPlane::new(w, h, gray.into_raw())?))
    }
}

/// Writes PNG or PPM depending on the extension (`.ppm`/`.pgm` → binary PNM,
/// anything else → PNG).
pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    if ext == "ppm" || ext == "pgm" {
        return fs::write(path, encode_pnm(img)).map_err(Error::from);
    }
    let (w, h) = (img.width() as u32, img.height() as u32);
    let data = img.to_interleaved();
    let color = if img.is_gray() {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    image::save_buffer_with_format(path, &data, w, h, color, image::ImageFormat::Png)?;
    Ok(())
}

/// Binary P6 (RGB) or P5 (gray) bytes.
pub fn encode_pnm(img: &Image) -> Vec<u8> {
    let magic = if img.is_gray() { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_interleaved());
    out
}

fn is_lossless_image(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("png" | "ppm" | "pgm" | "bmp")
    )
}

/// Lossless images in `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_lossless_image(p))
        .collect();
    out.sort();
    Ok(out)
}

/// File stem used as the image id in reports.
pub fn image_id(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string()
}
