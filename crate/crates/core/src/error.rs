use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the descriptor and evaluation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("image of {width}x{height} is too small for ring distance {distance} (needs at least {needed}x{needed})")]
    Dimension {
        width: usize,
        height: usize,
        distance: usize,
        needed: usize,
    },

    #[error("pixel ({row}, {col}) is outside the valid interior for ring distance {distance}")]
    Bounds {
        row: usize,
        col: usize,
        distance: usize,
    },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("cannot build a histogram from an empty code region")]
    EmptyRegion,

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("feature store {path}, line {line}: {reason}")]
    Store {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
