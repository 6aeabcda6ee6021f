//! DCT-domain plumbing for the network: per-frequency normalization,
//! quantization-matrix normalization, channelwise frequency rearrangement and
//! block-grid resampling.
//!
//! Frequencies are always indexed in raster order `k = 8i + j`.

pub mod layout;
pub mod stats;

pub use layout::{
    decimate_blocks, image_to_coefficients, nn_upsample_coefficient_plane, pixel_upsample_coefficient_plane,
    pixels_to_coefficients,
    rearrange_frequencies, unrearrange_frequencies, RearrangedPlane,
};
pub use stats::{
    compute_normalization_stats, denormalize_plane, normalize_plane, normalize_quant_matrix, FrequencyStats,
    NormalizationStats, STD_FLOOR,
};
