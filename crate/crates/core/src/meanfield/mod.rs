//! Initial-data sampling, binned hydrodynamic fields and the mean-field
//! studies.

mod fields;
mod initial;
mod pair;
mod study;

pub use fields::{local_fields, mk_index, mk_index_at, Cell, CellNode, LocalField};
pub use initial::{sample_initial, Density, InitialSpec, VelocityField};
pub use pair::{pair_alignment_study, PairRow};
pub use study::{refinement_study, CauchyRow, RunReport, RunStatus, StudyConfig, StudyReport};

use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::dynamics::DynamicsError;
use crate::measures::MeasureError;
use crate::weakform::WeakformError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeanfieldError {
    #[error("invalid initial-data specification: {0}")]
    InvalidSpec(String),
    #[error("{redraws} duplicate redraws exceed the limit of {limit}; the density is degenerate")]
    RejectionOverflow { redraws: usize, limit: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("pair run with eps = {eps} failed: {source}")]
    PairRun { eps: f64, source: DynamicsError },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Weakform(#[from] WeakformError),
}

impl MeanfieldError {
    pub fn kind(&self) -> &'static str {
        match self {
            MeanfieldError::InvalidSpec(_) => "InvalidSpec",
            MeanfieldError::RejectionOverflow { .. } => "RejectionOverflow",
            MeanfieldError::InvalidInput(_) => "InvalidInput",
            MeanfieldError::PairRun { source, .. } => source.kind(),
            MeanfieldError::Dynamics(e) => e.kind(),
            MeanfieldError::Measure(e) => e.kind(),
            MeanfieldError::Diagnostics(e) => e.kind(),
            MeanfieldError::Weakform(e) => e.kind(),
        }
    }
}
