//! Error type shared across the library.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed content in an input file, with a 1-based line number.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A cross-record integrity violation (duplicate ids, dangling
    /// references, conflicting labels).
    #[error("integrity: {0}")]
    Integrity(String),

    /// Invalid run configuration or invalid operation arguments.
    #[error("config: {0}")]
    Config(String),

    /// A computation was asked for on degenerate input (empty matrix,
    /// no votes for a name, empty year range).
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors that indicate bad inputs or configuration rather
    /// than a failure while computing. The CLI maps these to exit code 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::Integrity(_) | Error::Config(_)
        )
    }
}
