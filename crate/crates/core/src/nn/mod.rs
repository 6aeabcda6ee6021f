//! A small deterministic tensor engine with reverse-mode differentiation.
//!
//! Only the operators the restoration network and its losses need are
//! provided. Everything is `f64`; a graph is built per forward pass and
//! [`Tensor::backward`] walks it in reverse creation order.

pub mod conv;
pub mod gradcheck;
pub mod init;
pub mod layout;
pub mod ops;
pub mod optim;
pub mod params;
pub mod tensor;

pub use conv::{conv2d, conv_transpose2d, ConvSpec};
pub use gradcheck::{check_gradients, relative_error, Coverage, GradReport};
pub use layout::{block_dct, block_idct, concat_channels, concat_grouped, depth_to_space8, space_to_depth8};
pub use optim::{Adam, AdamConfig, LrSchedule};
pub use params::{Bindings, Param, ParamStore};
pub use tensor::{Shape, Tensor};
