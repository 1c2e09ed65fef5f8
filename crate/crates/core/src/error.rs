use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image: {0}")]
    Decode(String),

    #[error("unsupported image format: {0}")]
    Unsupported(String),

    #[error("color images are not supported ({0}); convert to grayscale first")]
    ColorImage(String),

    #[error("field must be at least 3x3, got {width}x{height}")]
    TooSmall { width: usize, height: usize },

    #[error("expected {expected} values for the field, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("region means coincide (c1 = c2 = {0}); global threshold is undefined")]
    CollapsedContrast(f64),

    #[error("SPF kind mismatch: expected {expected}, got {actual}")]
    SpfKindMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("degenerate region at iteration {iteration}: the {side} of the contour is empty")]
    DegenerateRegion { iteration: usize, side: &'static str },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
