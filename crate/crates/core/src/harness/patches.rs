//! Seeded random crops saved as lossless originals plus one JPEG per quality.
//!
//! Crop corners for the `i`-th input image come from `ChaCha8Rng` seeded with
//! the corpus seed on stream `i`, drawn as `(x, y)` pairs uniformly over all
//! valid positions. Layout under the output directory:
//!
//! ```text
//! originals/<image>_p<k>.png
//! q<quality>/<image>_p<k>.jpg
//! manifest.csv
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::{image_id, read_image, write_image};
use crate::error::{Error, Result};
use crate::jpeg::{encode_jpeg, EncodeOptions, Image, Subsampling};

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    pub patch_size: usize,
    pub patches_per_image: usize,
    pub qualities: Vec<u8>,
    pub seed: u64,
    pub subsampling: Subsampling,
}

impl Default for PatchSpec {
    fn default() -> Self {
        Self {
            patch_size: 256,
            patches_per_image: 30,
            qualities: (1..=10).map(|q| q * 10).collect(),
            seed: 0,
            subsampling: Subsampling::S420,
        }
    }
}

impl PatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || self.patch_size % 16 != 0 {
            return Err(Error::Config(format!("patch size {} is not a positive multiple of 16", self.patch_size)));
        }
        if self.qualities.is_empty() || self.qualities.iter().any(|q| !(1..=100).contains(q)) {
            return Err(Error::Config(format!("qualities {:?} must be non-empty within 1..=100", self.qualities)));
        }
        Ok(())
    }

    /// JPEG files produced from `images` usable inputs.
    pub fn jpeg_count(&self, images: usize) -> usize {
        images * self.patches_per_image * self.qualities.len()
    }
}

/// Crop corners for an image of `width × height`, the `index`-th of the corpus.
pub fn crop_coordinates(width: usize, height: usize, spec: &PatchSpec, index: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    (0..spec.patches_per_image)
        .map(|_| {
            let x = rng.gen_range(0..=width - spec.patch_size);
            let y = rng.gen_range(0..=height - spec.patch_size);
            (x, y)
        })
        .collect()
}

/// One manifest row: an original crop, one of its JPEGs, or a skipped image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub kind: String,
    pub image: String,
    pub source: String,
    pub patch: usize,
    pub x: usize,
    pub y: usize,
    pub size: usize,
    /// 0 for originals and skips.
    pub quality: u8,
    /// Relative to the corpus directory; empty for skips.
    pub path: String,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatchManifest {
    pub entries: Vec<ManifestEntry>,
}

impl PatchManifest {
    pub fn count(&self, kind: &str) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let entries = r.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(Self { entries })
    }
}

fn patch_name(id: &str, k: usize) -> String {
    format!("{id}_p{k:03}")
}

fn one_image(path: &Path, index: usize, out_dir: &Path, spec: &PatchSpec) -> Result<Vec<ManifestEntry>> {
    let id = image_id(path);
    let source = path.display().to_string();
    let img = read_image(path)?;
    let ps = spec.patch_size;
    let entry = |kind: &str, patch, x, y, quality, path: String, note: String| ManifestEntry {
        kind: kind.into(),
        image: id.clone(),
        source: source.clone(),
        patch,
        x,
        y,
        size: ps,
        quality,
        path,
        note,
    };
    if img.width() < ps || img.height() < ps {
        let note = format!("{}x{} smaller than patch size {ps}", img.width(), img.height());
        eprintln!("warning: skipping {source}: {note}");
        return Ok(vec![entry("skipped", 0, 0, 0, 0, String::new(), note)]);
    }
    let mut out = Vec::new();
    for (k, (x, y)) in crop_coordinates(img.width(), img.height(), spec, index as u64).into_iter().enumerate() {
        let crop = img.crop_at(x, y, ps, ps)?;
        let name = patch_name(&id, k);
        let rel = format!("originals/{name}.png");
        write_image(&out_dir.join(&rel), &crop)?;
        out.push(entry("original", k, x, y, 0, rel, String::new()));
        for &q in &spec.qualities {
            let rel = format!("q{q:03}/{name}.jpg");
            fs::write(out_dir.join(&rel), encode_jpeg(&crop, &EncodeOptions::new(q, spec.subsampling))?)?;
            out.push(entry("jpeg", k, x, y, q, rel, String::new()));
        }
    }
    Ok(out)
}

/// Writes the corpus for `images` (in the given order) under `out_dir`.
pub fn extract_patches(images: &[PathBuf], out_dir: &Path, spec: &PatchSpec) -> Result<PatchManifest> {
    spec.validate()?;
    fs::create_dir_all(out_dir.join("originals"))?;
    for q in &spec.qualities {
        fs::create_dir_all(out_dir.join(format!("q{q:03}")))?;
    }
    let per_image: Vec<Result<Vec<ManifestEntry>>> = images
        .par_iter()
        .enumerate()
        .map(|(i, p)| one_image(p, i, out_dir, spec))
        .collect();
    let mut entries = Vec::new();
    for r in per_image {
        entries.extend(r?);
    }
    let manifest = PatchManifest { entries };
    manifest.write(&out_dir.join("manifest.csv"))?;
    Ok(manifest)
}

/// A lossless crop and its compressed version.
#[derive(Debug, Clone)]
pub struct PatchPair {
    pub name: String,
    pub original: Image,
    pub jpeg: Vec<u8>,
}

/// Pairs at `quality` from a corpus directory, in manifest order.
pub fn load_patch_pairs(dir: &Path, quality: u8) -> Result<Vec<PatchPair>> {
    let manifest = PatchManifest::read(&dir.join("manifest.csv"))?;
    let mut out = Vec::new();
    for e in manifest.entries.iter().filter(|e| e.kind == "jpeg" && e.quality == quality) {
        let original = manifest
            .entries
            .iter()
            .find(|o| o.kind == "original" && o.image == e.image && o.patch == e.patch)
            .ok_or_else(|| Error::Config(format!("manifest has no original for {}", e.path)))?;
        out.push(PatchPair {
            name: patch_name(&e.image, e.patch),
            original: read_image(&dir.join(&original.path))?,
            jpeg: fs::read(dir.join(&e.path))?,
        });
    }
    Ok(out)
}
