use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rle counts sum to {actual}, expected {expected}")]
    SumMismatch { expected: u64, actual: u64 },
    #[error("rle has a zero-length run at position {0}")]
    ZeroRun(usize),
    #[error("format error: {0}")]
    Format(String),
    #[error("pixel value {value} at ({x}, {y}) is not a class index (K = {classes})")]
    ClassOutOfRange { value: u8, x: u32, y: u32, classes: usize },
    #[error("bad magic bytes in feature file")]
    BadMagic,
    #[error("truncated file: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: u64, actual: u64 },
    #[error("non-finite value at element {0}")]
    NonFiniteValue(usize),
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimMismatch { expected: (u32, u32), actual: (u32, u32) },
    #[error("IoU undefined for two empty masks")]
    BothEmpty,
    #[error("mask is empty")]
    EmptyMask,
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("segmenter backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("segmenter backend protocol error: {0}")]
    Protocol(String),
    #[error("image not found: {0}")]
    ImageNotFound(String),
    #[error("segmenter returned an empty mask")]
    EmptyResult,
    #[error("prompt pool is empty")]
    EmptyPool,
    #[error("dataset has fewer than two distinct labels")]
    DegenerateDataset,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("connectivity {0} is missing loss, eta or probabilities")]
    MissingStatistics(u32),
    #[error("no connectivities in input")]
    EmptyInput,
    #[error("resample pool is empty")]
    PoolEmpty,
    #[error("connectivity {id} ({w}x{h}) does not fit the destination")]
    DoesNotFit { id: u32, w: u32, h: u32 },
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File { path: path.into(), source }
    }

    pub(crate) fn dims(expected: (u32, u32), actual: (u32, u32)) -> Self {
        Error::DimMismatch { expected, actual }
    }
}
