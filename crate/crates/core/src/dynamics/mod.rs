//! N-particle Cucker-Smale dynamics with the strongly singular weight
//! `psi(s) = s^-alpha`.

mod integrate;
mod io;
mod params;
mod rhs;
mod state;

pub use integrate::{
    integrate, integrate_with, uniform_times, Control, Dopri5, IntegrationFailure,
    IntegratorOptions, OdeSystem, RunStats, StepLog, StepView, Trajectory,
};
pub use io::{read_trajectory_csv, trajectory_summary, write_trajectory_csv, TrajectorySummary};
pub use params::{ModelParams, MAX_DIM};
pub(crate) use rhs::psi_from_dist2;
pub use rhs::{alignment_rhs, min_pair_distance, pair_scan, AlignmentSystem, PairScan};
pub use state::ParticleState;
pub(crate) use state::dist2;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid particle state: {0}")]
    InvalidState(String),
    #[error("collisional state: particles {i} and {j} at distance {distance:e}")]
    CollisionalState { i: usize, j: usize, distance: f64 },
    #[error(
        "step size collapsed to {h:e} at t = {t} (floor {floor:e}); closest approach between particles {i} and {j} at distance {distance:e}"
    )]
    StepCollapse {
        t: f64,
        h: f64,
        floor: f64,
        i: usize,
        j: usize,
        distance: f64,
    },
    #[error("step budget of {steps} exhausted at t = {t}")]
    TooManySteps { t: f64, steps: usize },
    #[error("invalid snapshot times: {0}")]
    InvalidSnapshotTimes(String),
}

impl DynamicsError {
    pub fn kind(&self) -> &'static str {
        match self {
            DynamicsError::InvalidParams(_) => "InvalidParams",
            DynamicsError::InvalidState(_) => "InvalidState",
            DynamicsError::CollisionalState { .. } => "CollisionalState",
            DynamicsError::StepCollapse { .. } => "StepCollapse",
            DynamicsError::TooManySteps { .. } => "TooManySteps",
            DynamicsError::InvalidSnapshotTimes(_) => "InvalidSnapshotTimes",
        }
    }
}
