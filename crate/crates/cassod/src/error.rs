//! Error type shared by every module in the crate.

use std::path::PathBuf;

/// Errors raised by tensor operations, module construction, the hardware
/// model, network parsing, and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Tensor or kernel shapes are incompatible with the requested operation.
    #[error("shape error: {0}")]
    Shape(String),

    /// A dilation rate that the operation cannot accept (e.g. odd D with an
    /// even filter size).
    #[error("invalid dilation {dilation}: {reason}")]
    InvalidDilation { dilation: usize, reason: String },

    /// Base filter size outside the supported 1..=7 range.
    #[error("unsupported filter size {base_size}: supported sizes are 1..=7")]
    UnsupportedFilter { base_size: usize },

    /// Dilation rate outside what the configured pixel array can route.
    #[error("unsupported dilation {dilation}: {reason} (maximum supported is {max_supported})")]
    UnsupportedDilation {
        dilation: usize,
        max_supported: usize,
        reason: String,
    },

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Network text could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Network parsed but a layer violates a structural rule.
    #[error("layer {index}: {message}")]
    Semantic { index: usize, message: String },

    /// Malformed tensor file.
    #[error("tensor file {path}: {message}")]
    TensorFormat { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
