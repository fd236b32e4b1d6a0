//! Scalar functionals of phase-space measures and trajectory-level checks.

mod functionals;
mod report;
mod trajectory;

pub use functionals::{
    beta_eta, dalpha, enstrophy, eta_monokineticity, kinetic_energy, momentum,
    DEFAULT_ETA_LADDER,
};
pub use report::{diagnostics_report, write_series_csv, DiagnosticsReport, SnapshotDiagnostics};
pub use trajectory::{
    energy_balance_residual, energy_balance_series, mp_margin, sf_modulus, EnergyBalance,
};

use thiserror::Error;

use crate::measures::MeasureError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("time {t} is not a snapshot time of the trajectory")]
    SnapshotMissing { t: f64 },
    #[error("the normalisation integral diverges for alpha = {alpha} < d = {dim}")]
    DivergentNormalization { alpha: f64, dim: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl DiagnosticsError {
    pub fn kind(&self) -> &'static str {
        match self {
            DiagnosticsError::SnapshotMissing { .. } => "SnapshotMissing",
            DiagnosticsError::DivergentNormalization { .. } => "DivergentNormalization",
            DiagnosticsError::Unsupported(_) => "Unsupported",
            DiagnosticsError::InvalidInput(_) => "InvalidInput",
            DiagnosticsError::Measure(e) => e.kind(),
        }
    }
}
