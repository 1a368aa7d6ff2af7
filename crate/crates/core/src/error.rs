use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Shapes or element counts do not agree.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Non-finite input or a numerical routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Bond dimensions of a network do not line up.
    #[error("structure error: {0}")]
    Structure(String),

    /// Malformed file contents.
    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
