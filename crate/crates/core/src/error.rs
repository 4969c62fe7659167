use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {detail}")]
    Validation { what: &'static str, detail: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{role} is singular or ill-conditioned (condition estimate {cond:.3e}){hint}")]
    Singular {
        role: String,
        cond: f64,
        hint: &'static str,
    },

    #[error("{estimator}: imaginary residue {residue:.3e} exceeds tolerance {limit:.3e}")]
    NotReal {
        estimator: &'static str,
        residue: f64,
        limit: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{path}: row {row}, column {column}: {msg}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        msg: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{failed} of {trials} trials failed at {point} (first failure: {first})")]
    TrialFailures {
        point: String,
        failed: usize,
        trials: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Validation {
            what,
            detail: detail.into(),
        }
    }
}
