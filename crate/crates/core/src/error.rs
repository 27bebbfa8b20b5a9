use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: I/O error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic at offset {offset}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        path: PathBuf,
        offset: u64,
        expected: u32,
        found: u32,
    },

    #[error("{path}: truncated file at offset {offset}: needed {needed} more bytes")]
    Truncated {
        path: PathBuf,
        offset: u64,
        needed: u64,
    },

    #[error("count mismatch: {images_path} holds {images} images, {labels_path} holds {labels} labels")]
    CountMismatch {
        images_path: PathBuf,
        labels_path: PathBuf,
        images: usize,
        labels: usize,
    },

    #[error("{path}: row {row}: expected {expected} fields, found {found}")]
    FieldCount {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}: unparseable token {token:?}")]
    BadToken {
        path: PathBuf,
        row: usize,
        token: String,
    },

    #[error("{path}: row {row}: label {label} outside 0..=9")]
    LabelOutOfRange {
        path: PathBuf,
        row: usize,
        label: String,
    },

    #[error("{path}: row {row}: pixel value {value} outside [0, 1]")]
    PixelOutOfRange {
        path: PathBuf,
        row: usize,
        value: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("model file truncated: expected {expected} bytes, found {actual}")]
    ModelTruncated { expected: usize, actual: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
