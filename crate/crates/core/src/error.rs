//! Error types shared by every stage of the toolkit.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for loading, validation, simulation and analysis.
///
/// The CLI maps variants onto its exit-code contract: [`Error::Config`] is a
/// usage/configuration problem (exit 2), everything else is a data problem
/// (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    /// I/O failure on a named file.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed row in an input file. `line` is 1-based and counts the
    /// header, matching what an editor shows.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A structural invariant violated by otherwise well-formed input
    /// (duplicate devices, overlapping schedule blocks, unknown references).
    #[error("invalid data: {0}")]
    Invalid(String),

    /// A bad configuration value or an impossible parameter combination.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
