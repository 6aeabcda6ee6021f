//! Run configuration and its key-value file form.
//!
//! The file is TOML; every key is optional and command-line flags override it:
//!
//! ```text
//! input_dirs = ["data/live1"]       # directories of lossless images
//! dataset = "live1"                 # label in CSV output (default: first dir name)
//! output_dir = "out"
//! checkpoint = "model.qgac"         # optional
//! qualities = [10, 20, 50]
//! metrics_conventions = ["standard", "luma"]
//! subsampling = "420"               # or "444"
//! threads = 4                       # 0 or absent: all cores
//! seed = 0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::jpeg::Subsampling;
use crate::metrics::MetricsConvention;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_dirs: Vec<PathBuf>,
    pub dataset: Option<String>,
    pub output_dir: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub qualities: Vec<u8>,
    pub conventions: Vec<MetricsConvention>,
    pub subsampling: Subsampling,
    pub threads: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input_dirs: Vec::new(),
            dataset: None,
            output_dir: PathBuf::from("out"),
            checkpoint: None,
            qualities: (1..=10).map(|q| q * 10).collect(),
            conventions: vec![MetricsConvention::Standard],
            subsampling: Subsampling::S420,
            threads: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input_dirs: Option<Vec<PathBuf>>,
    dataset: Option<String>,
    output_dir: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    qualities: Option<Vec<u8>>,
    metrics_conventions: Option<Vec<String>>,
    subsampling: Option<String>,
    threads: Option<usize>,
    seed: Option<u64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = Self::default();
        if let Some(v) = f.input_dirs {
            c.input_dirs = v;
        }
        c.dataset = f.dataset;
        if let Some(v) = f.output_dir {
            c.output_dir = v;
        }
        c.checkpoint = f.checkpoint;
        if let Some(v) = f.qualities {
            c.qualities = v;
        }
        if let Some(v) = f.metrics_conventions {
            c.conventions = v.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = f.subsampling {
            c.subsampling = v.parse()?;
        }
        c.threads = f.threads.filter(|&t| t > 0);
        if let Some(v) = f.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(q) = self.qualities.iter().find(|&&q| !(1..=100).contains(&q)) {
            return Err(Error::Config(format!("quality {q} outside 1..=100")));
        }
        if self.qualities.is_empty() {
            return Err(Error::Config("no qualities given".into()));
        }
        if self.conventions.is_empty() {
            return Err(Error::Config("no metrics conventions given".into()));
        }
        Ok(())
    }

    /// Fails unless every referenced input exists.
    pub fn check_paths(&self) -> Result<()> {
        for d in &self.input_dirs {
            if !d.is_dir() {
                return Err(Error::Config(format!("input directory {} does not exist", d.display())));
            }
        }
        if let Some(c) = &self.checkpoint {
            if !c.is_file() {
                return Err(Error::Config(format!("checkpoint {} does not exist", c.display())));
            }
        }
        Ok(())
    }

    /// Label of the `i`-th input directory.
    pub fn dataset_name(&self, i: usize) -> String {
        if let (Some(name), 1) = (&self.dataset, self.input_dirs.len()) {
            return name.clone();
        }
        self.input_dirs
            .get(i)
            .and_then(|d| d.file_name())
            .and_then(|n| n.to_str())
            .unwrap_or("dataset")
            .to_string()
    }
}

/// Runs `f` on a rayon pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
