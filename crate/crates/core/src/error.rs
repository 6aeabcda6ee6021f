use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed JPEG data, located by byte offset into the input.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A valid JPEG feature outside the baseline subset.
    #[error("unsupported JPEG feature: {0}")]
    Unsupported(String),

    #[error("encode error: {0}")]
    Encode(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    /// Training produced a non-finite value.
    #[error("non-finite value in {what} at step {step}")]
    NonFinite { what: String, step: usize },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }

    pub(crate) fn parse(offset: usize, msg: impl fmt::Display) -> Self {
        Error::Parse {
            offset,
            message: msg.to_string(),
        }
    }
}
