use std::io;

use thiserror::Error;

/// Errors produced by the sanitization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed audio file: {0}")]
    Format(String),

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("clip too short for one analysis window ({samples} samples < {window})")]
    EmptyMatrix { samples: usize, window: usize },

    #[error("frequency estimator undefined at p = 1")]
    EstimatorUndefined,

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
