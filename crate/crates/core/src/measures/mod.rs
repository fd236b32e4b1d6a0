//! Atomic measures, disintegration, the bounded-Lipschitz metric and the
//! free-transport pushforward.

mod dbl;
mod disintegration;
mod empirical;
pub mod lp;
mod pushforward;

pub use dbl::{dbl, dbl_with, DblMethod, DblOptions, DblSolution, DEFAULT_SUPPORT_CAP};
pub use disintegration::{disintegrate, Disintegration, Group};
pub use empirical::{EmpiricalMeasure, Space};
pub use pushforward::{phi_weighted_marginal, pushforward_t};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasureError {
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("expected a phase-space measure")]
    NotPhaseSpace,
    #[error("grouping tolerance {tolerance:e} produced a cluster of diameter {diameter:e}; lower the tolerance")]
    AmbiguousGrouping { tolerance: f64, diameter: f64 },
    #[error("union support of {size} atoms exceeds the LP cap of {cap}")]
    SupportTooLarge { size: usize, cap: usize },
    #[error("linear program failed: {0}")]
    Lp(String),
}

impl MeasureError {
    pub fn kind(&self) -> &'static str {
        match self {
            MeasureError::Invalid(_) => "InvalidMeasure",
            MeasureError::DimensionMismatch(..) => "DimensionMismatch",
            MeasureError::NotPhaseSpace => "NotPhaseSpace",
            MeasureError::AmbiguousGrouping { .. } => "AmbiguousGrouping",
            MeasureError::SupportTooLarge { .. } => "SupportTooLarge",
            MeasureError::Lp(_) => "LpFailure",
        }
    }
}
