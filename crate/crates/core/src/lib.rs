//! Quantization-guided JPEG artifact correction in the DCT domain.
//!
//! The crate is organized bottom-up:
//!
//! * [`jpeg`]: a baseline JPEG codec with direct access to quantized and
//!   dequantized DCT coefficients and quantization tables.
//! * [`coeff`]: per-frequency normalization, frequency rearrangement and
//!   coefficient-grid resampling.
//! * [`nn`]: a small deterministic reverse-mode tensor engine with the
//!   operators the network needs, Adam and learning-rate schedules.
//! * [`model`]: convolutional filter manifolds, RRDB blocks, BlockNet,
//!   FrequencyNet, fusion, the Y and color networks, and checkpoints.
//! * [`losses`] and [`metrics`]: training objectives and PSNR / PSNR-B / SSIM.
//! * [`harness`]: patch extraction, dataset evaluation, analyses and a
//!   desk-scale trainer, driven by the `qgac` binary.

pub mod error;
pub mod jpeg;
pub mod losses;

pub use error::{Error, Result};
pub mod coeff;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod nn;
