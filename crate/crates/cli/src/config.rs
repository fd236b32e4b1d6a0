//! Per-subcommand configuration documents.
//!
//! Every document is a JSON object with the fields below; unknown fields
//! are rejected. Missing optional fields take the defaults listed here, and
//! the fully resolved document (after `--seed` / `--tol` overrides) is
//! embedded in each report, so feeding it back through `--config`
//! reproduces the run.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use singularcs::diagnostics::DEFAULT_ETA_LADDER;
use singularcs::dynamics::{IntegratorOptions, ModelParams};
use singularcs::meanfield::{CellNode, Density, InitialSpec, StudyConfig, VelocityField};
use singularcs::measures::DblOptions;
use singularcs::weakform::DEFAULT_BATTERY_SIZE;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL: f64 = 1e-9;

fn default_options() -> IntegratorOptions {
    IntegratorOptions::with_tol(DEFAULT_TOL)
}
fn default_snapshots() -> usize {
    100
}
fn default_eta_ladder() -> Vec<f64> {
    DEFAULT_ETA_LADDER.to_vec()
}
fn default_battery_size() -> usize {
    DEFAULT_BATTERY_SIZE
}

fn default_params(n: usize) -> ModelParams {
    ModelParams::new(1, 1.0, n, 1.0, 1.0)
}

fn default_initial() -> InitialSpec {
    InitialSpec {
        density: Density::UniformBox { half_width: 1.0 },
        velocity: VelocityField::Sinusoid {
            amplitude: 0.3,
            wavenumber: 1.0,
        },
        seed: DEFAULT_SEED,
    }
}

/// Bin widths `diameter / {8, 16, 32}` of the ball `(T+1) B(M)`.
pub fn default_bin_widths(params: &ModelParams) -> Vec<f64> {
    let diameter = 2.0 * params.position_bound();
    vec![diameter / 8.0, diameter / 16.0, diameter / 32.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub params: ModelParams,
    pub initial: InitialSpec,
    /// Number of uniform snapshot intervals on `[0, T]`.
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default = "default_options")]
    pub options: IntegratorOptions,
    #[serde(default = "default_eta_ladder")]
    pub eta_ladder: Vec<f64>,
    #[serde(default)]
    pub bin_widths: Option<Vec<f64>>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            params: default_params(10),
            initial: default_initial(),
            snapshots: default_snapshots(),
            options: default_options(),
            eta_ladder: default_eta_ladder(),
            bin_widths: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DblConfig {
    #[serde(default)]
    pub dbl: DblOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    /// Model parameters of the trajectory; `n_particles` is taken from the
    /// file.
    pub params: ModelParams,
    #[serde(default = "default_eta_ladder")]
    pub eta_ladder: Vec<f64>,
    #[serde(default)]
    pub bin_widths: Option<Vec<f64>>,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            params: default_params(10),
            eta_ladder: default_eta_ladder(),
            bin_widths: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualConfig {
    pub params: ModelParams,
    #[serde(default = "default_battery_size")]
    pub battery_size: usize,
    #[serde(default)]
    pub battery_seed: u64,
    /// Cell width for binned fields of a trajectory input; defaults to
    /// the initial support diameter over 16.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub node: CellNode,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        Self {
            params: default_params(10),
            battery_size: default_battery_size(),
            battery_seed: 0,
            h: None,
            node: CellNode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfstudyConfig {
    pub spec: InitialSpec,
    pub params: ModelParams,
    #[serde(default = "default_options")]
    pub options: IntegratorOptions,
    pub study: StudyConfig,
}

impl Default for MfstudyConfig {
    fn default() -> Self {
        Self {
            spec: default_initial(),
            params: default_params(400),
            options: default_options(),
            study: StudyConfig::new(vec![50, 100, 200, 400], vec![0.25, 0.5, 0.75, 1.0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairstudyConfig {
    pub params: ModelParams,
    pub eps_list: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    #[serde(default = "default_options")]
    pub options: IntegratorOptions,
}

impl Default for PairstudyConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::new(1, 1.0, 2, 2.0, 1.0),
            eps_list: vec![0.5, 0.25, 0.125, 0.0625],
            v1: vec![-0.1],
            v2: vec![0.1],
            options: default_options(),
        }
    }
}

/// Read a config document, or fall back to the subcommand default.
pub fn load<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C, CliError> {
    let Some(path) = path else {
        return Ok(C::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn check_positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be a positive number, got {x}")))
    }
}
