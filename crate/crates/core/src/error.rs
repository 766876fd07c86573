use std::path::PathBuf;

/// Errors produced by the tracking pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("sample position ({0}, {1}, {2}) lies outside [0,1]^3")]
    OutOfVolume(f64, f64, f64),

    #[error("degenerate ray segment: entry and exit coincide")]
    DegenerateSegment,

    #[error("hedgehog contains no spines")]
    EmptyHedgehog,

    #[error("no spine carries a local maximum; hedgehog cannot seed a track")]
    Unseedable,

    #[error("track and ground truth share no timepoints")]
    NoCommonTimepoints,

    #[error("invalid data in {path}: {reason}")]
    InvalidData { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn data(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::InvalidData { path: path.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
