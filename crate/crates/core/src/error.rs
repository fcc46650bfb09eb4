use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter value or violated cross-field invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("unknown config key `{key}` on line {line}")]
    UnknownKey { line: usize, key: String },

    #[error("malformed control file: {0}")]
    ControlFormat(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The adjoint particle cloud vanished and nothing can replenish it.
    #[error("adjoint ensemble collapsed to zero particles at step {step}")]
    AdjointCollapse { step: usize },

    #[error("adjoint ensemble exceeded the cap of {cap} particles at step {step} ({count})")]
    AdjointOverflow { step: usize, count: usize, cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
