use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::dynamics::DynamicsError;
use crate::meanfield::MeanfieldError;
use crate::measures::MeasureError;
use crate::weakform::WeakformError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error. Each module has its own error enum; this wraps them
/// so that orchestration code can use `?` across module boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Weakform(#[from] WeakformError),
    #[error(transparent)]
    Meanfield(#[from] MeanfieldError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable identifier of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dynamics(e) => e.kind(),
            Error::Measure(e) => e.kind(),
            Error::Diagnostics(e) => e.kind(),
            Error::Weakform(e) => e.kind(),
            Error::Meanfield(e) => e.kind(),
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
        }
    }
}
