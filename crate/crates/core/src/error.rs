use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the detection and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("region {0} has zero degree in the affinity graph")]
    ZeroDegree(usize),

    #[error("corner set {0} is empty")]
    EmptyCorner(&'static str),

    #[error("ground-truth mask is empty")]
    EmptyGroundTruth,

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("failed to decode {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("failed to encode {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("scale {scale}, stage {stage}: {source}")]
    Stage {
        scale: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: (usize, usize), actual: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected_w: expected.0,
            expected_h: expected.1,
            actual_w: actual.0,
            actual_h: actual.1,
        }
    }

    pub(crate) fn at(self, scale: usize, stage: &'static str) -> Self {
        Error::Stage {
            scale,
            stage,
            source: Box::new(self),
        }
    }
}
