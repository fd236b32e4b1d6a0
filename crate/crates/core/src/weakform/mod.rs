//! Test-function battery and residuals of the weak kinetic and
//! Euler-alignment formulations.

mod kinetic;
mod macroscopic;
mod report;
mod testfn;

pub use kinetic::{kinetic_weak_residual, KineticResidual};
pub use macroscopic::{
    check_fields, continuity_residual, dissipation_margin, momentum_residual, DissipationMargin,
};
pub use report::{
    field_residual_report, kinetic_residual_report, momentum_component, FieldResidualReport,
    KineticResidualReport,
};
pub use testfn::{
    test_battery, velocity_probes, Bump, FactorBound, Family, TestBounds, TestFunction,
    VelocityFactor, Window,
};

use thiserror::Error;

/// Default battery size.
pub const DEFAULT_BATTERY_SIZE: usize = 24;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WeakformError {
    #[error("field grids disagree: {0}")]
    GridMismatch(String),
    #[error("test function not admissible: {0}")]
    NotAdmissible(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl WeakformError {
    pub fn kind(&self) -> &'static str {
        match self {
            WeakformError::GridMismatch(_) => "GridMismatch",
            WeakformError::NotAdmissible(_) => "NotAdmissible",
            WeakformError::InvalidInput(_) => "InvalidInput",
        }
    }
}

/// Compensated trapezoid rule on a nonuniform grid.
pub(crate) fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    crate::exec::ksum((1..t.len()).map(|k| 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1])))
}
