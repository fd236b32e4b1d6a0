//! Simulation and verification toolkit for the strongly singular
//! Cucker-Smale particle system.
//!
//! The crate integrates the N-particle system with communication weight
//! `psi(s) = s^-alpha`, evaluates the measure-theoretic functionals that
//! govern its mean-field limit (kinetic energy, enstrophy, the `D^alpha`
//! functional, eta-regularised monokineticity indices), computes the
//! bounded-Lipschitz (flat) distance between atomic measures exactly, and
//! checks weak-formulation residuals for both the kinetic equation and the
//! fractional Euler-alignment system.
//!
//! Module map:
//!
//! * [`dynamics`]: model parameters, particle states, the alignment
//!   right-hand side and the adaptive Dormand-Prince integrator.
//! * [`measures`]: empirical measures, disintegration, the flat metric and
//!   free-transport pushforwards.
//! * [`diagnostics`]: scalar functionals and the (MP)/(SF) trajectory checks.
//! * [`weakform`]: test-function battery and weak residuals.
//! * [`meanfield`]: initial sampling, binned hydrodynamic fields, and the
//!   N-refinement and pair-alignment studies.
//!
//! Pairwise sums are evaluated row by row with compensated summation and
//! merged in a fixed order, so results do not depend on the number of
//! worker threads (see [`exec`]).

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod measures;
pub mod meanfield;
pub mod rng;
pub mod weakform;

pub use error::{Error, Result};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: &str = "1.0";
