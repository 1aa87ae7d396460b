use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the co-design pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("no converged design point to select from")]
    AllDiverged,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
