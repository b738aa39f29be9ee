use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a NIfTI-1 file: magic {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),

    #[error("truncated file: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: usize, actual: usize },

    #[error("volume is not 3D (dim = {0:?})")]
    Not3D([i16; 8]),

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("dimension mismatch: {gt:?} vs {pred:?}")]
    DimsMismatch { gt: [usize; 3], pred: [usize; 3] },

    #[error("spacing mismatch on axis {axis}: {gt} vs {pred}")]
    SpacingMismatch { axis: usize, gt: f64, pred: f64 },

    #[error("mask is not binary (found value {0})")]
    NotBinary(f64),

    #[error("operation requires a non-empty voxel set")]
    EmptySet,

    #[error("could not place lesion {lesion} after {attempts} attempts; grid too small")]
    PlacementFailure { lesion: usize, attempts: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("manifest error: {0}")]
    ManifestParse(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
