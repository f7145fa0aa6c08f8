use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: corrupt file: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error("{path}: unsupported format: {format}")]
    UnsupportedFormat { path: PathBuf, format: String },

    /// Rejection sampling ran out of retries before placing every point.
    #[error("spacing saturated: placed {achieved} of {requested} points")]
    Saturation { requested: usize, achieved: usize },

    #[error(
        "wave function collapse failed after {attempts} attempts ({contradictions} contradictions)"
    )]
    WfcFailure {
        attempts: usize,
        contradictions: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
