//! Error type shared across the library.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// I/O failure, tagged with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file contents; `reason` names the offending token.
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    /// Inputs whose shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
