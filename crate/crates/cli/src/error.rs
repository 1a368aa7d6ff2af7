use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tengrid::Error),

    /// Missing, contradictory or malformed settings.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 validation, 3 numeric failure, 4 I/O (including unreadable files).
    pub fn exit_code(&self) -> u8 {
        use tengrid::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                E::Dimension(_) | E::Argument(_) | E::Structure(_) => 2,
                E::Numeric(_) => 3,
                E::Format { .. } | E::Io { .. } => 4,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
