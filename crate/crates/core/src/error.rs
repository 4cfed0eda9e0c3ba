use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the curation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument or configuration value is out of its allowed range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data violates a precondition (empty pool, non-finite weight, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A projected curve does not span at least two distinct image rows.
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    /// A directed matching cost was requested with an empty source mask.
    #[error("cannot match {ref_lanes} reference lanes against an empty source mask")]
    UndefinedMatching { ref_lanes: usize },

    /// An exhaustive search would exceed the enumeration budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Manifest validation failed; every offender is listed.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
