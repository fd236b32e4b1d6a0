use serde::{Deserialize, Serialize};

use crate::diagnostics::kinetic_energy;
use crate::dynamics::{integrate_with, uniform_times, IntegratorOptions, ModelParams, Trajectory};
use crate::exec;
use crate::measures::{dbl_with, DblOptions, EmpiricalMeasure};
use crate::weakform::{field_residual_report, test_battery, DEFAULT_BATTERY_SIZE};

use super::{mk_index, sample_initial, CellNode, InitialSpec, LocalField, MeanfieldError};

fn default_intervals() -> usize {
    100
}
fn default_battery_size() -> usize {
    DEFAULT_BATTERY_SIZE
}

/// Settings of an N-refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub n_list: Vec<usize>,
    pub probe_times: Vec<f64>,
    /// Snapshot intervals on `[0, T]` used for the time quadratures.
    #[serde(default = "default_intervals")]
    pub intervals: usize,
    /// Cell width; defaults to the support diameter over 16.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default = "default_battery_size")]
    pub battery_size: usize,
    #[serde(default)]
    pub battery_seed: u64,
    #[serde(default)]
    pub node: CellNode,
    #[serde(default)]
    pub dbl: DblOptions,
}

impl StudyConfig {
    pub fn new(n_list: Vec<usize>, probe_times: Vec<f64>) -> Self {
        Self {
            n_list,
            probe_times,
            intervals: default_intervals(),
            h: None,
            battery_size: default_battery_size(),
            battery_seed: 0,
            node: CellNode::default(),
            dbl: DblOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed { kind: String, message: String },
}

/// Per-N results. Probe-indexed vectors follow `probe_times`; inner
/// vectors of `mk_index` and `max_cell_mass` follow `h_ladder`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub status: RunStatus,
    pub accepted_steps: usize,
    pub min_distance: f64,
    pub energy: Vec<f64>,
    pub mk_index: Vec<Vec<f64>>,
    pub max_cell_mass: Vec<Vec<f64>>,
    pub continuity_max: f64,
    pub momentum_max: f64,
    pub dissipation_min_margin: f64,
    /// Largest `-(margin + quadrature estimate)`; the dissipation
    /// inequality is met when this is `<= 0`.
    pub dissipation_worst_excess: f64,
}

/// Differences between consecutive entries of `n_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub n_coarse: usize,
    pub n_fine: usize,
    /// `dbl(rho^coarse_t, rho^fine_t)` per probe time.
    pub dbl: Vec<f64>,
    /// `|E^coarse_t - E^fine_t|` per probe time.
    pub energy_diff: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub spec: InitialSpec,
    pub params: ModelParams,
    pub options: IntegratorOptions,
    pub config: StudyConfig,
    pub diameter: f64,
    pub h: f64,
    pub h_ladder: Vec<f64>,
    pub probe_times: Vec<f64>,
    pub runs: Vec<RunReport>,
    pub cauchy: Vec<CauchyRow>,
}

struct Run {
    report: RunReport,
    traj: Option<Trajectory>,
}

/// Integrate the sampled system for every `N` (concurrently), bin the
/// snapshots and tabulate distances, energies, monokineticity indices,
/// weak residuals and dissipation margins. A failed `N` is recorded and
/// the others proceed.
pub fn refinement_study(
    spec: &InitialSpec,
    params: &ModelParams,
    options: &IntegratorOptions,
    config: &StudyConfig,
) -> Result<StudyReport, MeanfieldError> {
    params.validate()?;
    spec.validate(params)?;
    if config.n_list.len() < 2 || config.n_list.windows(2).any(|w| w[1] <= w[0]) || config.n_list[0] == 0 {
        return Err(MeanfieldError::InvalidInput(
            "n_list must hold at least two ascending positive sizes".into(),
        ));
    }
    if config.intervals == 0 || config.battery_size == 0 {
        return Err(MeanfieldError::InvalidInput("intervals and battery size must be >= 1".into()));
    }
    let horizon = params.horizon;
    if config.probe_times.iter().any(|t| !(*t >= 0.0 && *t <= horizon)) {
        return Err(MeanfieldError::InvalidInput(format!("probe times must lie in [0, {horizon}]")));
    }
    let diameter = spec.density.support_diameter(params.dim);
    let h = config.h.unwrap_or(diameter / 16.0);
    if !(h > 0.0) {
        return Err(MeanfieldError::InvalidInput(format!("cell width must be > 0, got {h}")));
    }
    let h_ladder = vec![diameter / 8.0, diameter / 16.0, diameter / 32.0];
    let battery = test_battery(params, config.battery_size, config.battery_seed)?;
    let mut times = uniform_times(horizon, config.intervals);
    times.extend_from_slice(&config.probe_times);

    let runs: Vec<Run> = exec::map_slice(&config.n_list, |&n| {
        match run_one(spec, params, options, config, &times, &battery, h, &h_ladder, n) {
            Ok(run) => run,
            Err(e) => Run {
                report: failed(n, &e),
                traj: None,
            },
        }
    });

    let probe_index = |traj: &Trajectory, t: f64| traj.snapshot_index(t).expect("probe times are snapshots");
    let mut cauchy = Vec::new();
    for w in runs.windows(2) {
        let (Some(a), Some(b)) = (&w[0].traj, &w[1].traj) else {
            continue;
        };
        let mut dbls = Vec::with_capacity(config.probe_times.len());
        for &t in &config.probe_times {
            let ra = EmpiricalMeasure::from_particles(&a.snapshots[probe_index(a, t)]).marginal_x()?;
            let rb = EmpiricalMeasure::from_particles(&b.snapshots[probe_index(b, t)]).marginal_x()?;
            dbls.push(dbl_with(&ra, &rb, &config.dbl)?.value);
        }
        let energy_diff = w[0]
            .report
            .energy
            .iter()
            .zip(&w[1].report.energy)
            .map(|(x, y)| (x - y).abs())
            .collect();
        cauchy.push(CauchyRow {
            n_coarse: w[0].report.n,
            n_fine: w[1].report.n,
            dbl: dbls,
            energy_diff,
        });
    }

    Ok(StudyReport {
        spec: spec.clone(),
        params: params.clone(),
        options: options.clone(),
        config: config.clone(),
        diameter,
        h,
        h_ladder,
        probe_times: config.probe_times.clone(),
        runs: runs.into_iter().map(|r| r.report).collect(),
        cauchy,
    })
}

fn failed(n: usize, e: &MeanfieldError) -> RunReport {
    RunReport {
        n,
        status: RunStatus::Failed {
            kind: e.kind().to_string(),
            message: e.to_string(),
        },
        accepted_steps: 0,
        min_distance: f64::NAN,
        energy: Vec::new(),
        mk_index: Vec::new(),
        max_cell_mass: Vec::new(),
        continuity_max: f64::NAN,
        momentum_max: f64::NAN,
        dissipation_min_margin: f64::NAN,
        dissipation_worst_excess: f64::NAN,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    spec: &InitialSpec,
    params: &ModelParams,
    options: &IntegratorOptions,
    config: &StudyConfig,
    times: &[f64],
    battery: &[crate::weakform::TestFunction],
    h: f64,
    h_ladder: &[f64],
    n: usize,
) -> Result<Run, MeanfieldError> {
    let mut p = params.clone();
    p.n_particles = n;
    let initial = sample_initial(spec, &p, n)?;
    let traj = integrate_with(&initial, &p, options, times).map_err(|f| f.error)?;

    let mut energy = Vec::new();
    let mut mk = Vec::new();
    let mut max_mass = Vec::new();
    for &t in &config.probe_times {
        let s = &traj.snapshots[traj.snapshot_index(t).expect("probe times are snapshots")];
        let mu = EmpiricalMeasure::from_particles(s);
        energy.push(kinetic_energy(&mu)?);
        let mut row_mk = Vec::new();
        let mut row_mass = Vec::new();
        for &hl in h_ladder {
            let f = LocalField::from_state(s, hl, config.node)?;
            row_mk.push(mk_index(&f));
            row_mass.push(f.max_cell_mass());
        }
        mk.push(row_mk);
        max_mass.push(row_mass);
    }

    let fields = traj
        .snapshots
        .iter()
        .map(|s| LocalField::from_state(s, h, config.node))
        .collect::<Result<Vec<_>, _>>()?;
    let mu0 = EmpiricalMeasure::from_particles(traj.first());
    let res = field_residual_report(&fields, battery, p.alpha, &mu0)?;
    let diss = &res.dissipation;
    let worst_excess = diss
        .margin
        .iter()
        .zip(&diss.quadrature_estimate)
        .map(|(m, q)| -(m + q))
        .fold(f64::NEG_INFINITY, f64::max)
        + 0.0;

    Ok(Run {
        report: RunReport {
            n,
            status: RunStatus::Ok,
            accepted_steps: traj.steps.len(),
            min_distance: traj.min_distance(),
            energy,
            mk_index: mk,
            max_cell_mass: max_mass,
            continuity_max: res.continuity_max,
            momentum_max: res.momentum_max,
            dissipation_min_margin: diss.min_margin(),
            dissipation_worst_excess: worst_excess,
        },
        traj: Some(traj),
    })
}
