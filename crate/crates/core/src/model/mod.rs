//! The restoration network: quantization-conditioned kernel generators (CFM),
//! RRDB blocks, BlockNet, FrequencyNet, fusion, the luma network and the
//! luma-guided color network, plus checkpoints and inference.
//!
//! Parameter names are dotted paths under five groups: `blocknet_pre`,
//! `frequencynet`, `blocknet_post`, `fusion` and `color_net`. The full table
//! comes from [`Qgac::architecture`].

pub mod checkpoint;
pub mod config;
pub mod layers;
pub mod networks;
pub mod restore;

pub use checkpoint::{interpolate_params, load_checkpoint, save_checkpoint, ModelCheckpoint, Stage, FORMAT_VERSION, SUPPORTED_VERSIONS};
pub use config::NetworkConfig;
pub use layers::{Init, ParamSpec};
pub use networks::{is_luma_param, subnetwork_of, BlockNet, ColorNet, FrequencyNet, Fusion, Qgac, YNet, YOutputs, SUBNETWORKS};
pub use restore::{
    color_restore, color_restore_batch, denormalize_tensor, planes_to_tensor, qnorm_tensor, restore_coefficients, restore_image,
    stats_maps, tensor_to_planes, y_restore,
};
