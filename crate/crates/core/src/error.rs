use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Top singular value of a spectral-ball point is (numerically) repeated
    /// and the point is not frame-diagonal; callers resample.
    #[error("degenerate support functional: {0}")]
    Degenerate(String),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("integrator instability: {0}")]
    IntegratorInstability(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        LabError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// True for failures that come from floating-point behaviour rather than
    /// from bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            LabError::NumericalInstability(_) | LabError::IntegratorInstability(_)
        )
    }
}
