use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    /// The unicycle input matrix cannot be inverted at this speed.
    #[error("input matrix singular: speed {speed} is below the guard {v_min}")]
    Singular { speed: f64, v_min: f64 },

    #[error("agent has no neighbors (total weight {total_weight})")]
    Isolated { total_weight: f64 },

    #[error("non-finite value produced: {0}")]
    NonFinite(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("graph disconnected: {0}")]
    Disconnected(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("simulation aborted at step {step}: {reason}")]
    Aborted { step: usize, reason: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Configuration and argument problems, as opposed to failures while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Validation { .. } | Error::Domain(_) | Error::Io { .. }
        )
    }
}
