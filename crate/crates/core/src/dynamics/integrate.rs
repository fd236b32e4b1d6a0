//! Dormand-Prince 5(4) with PI step control and a singularity guard.

use serde::{Deserialize, Serialize};

use super::rhs::AlignmentSystem;
use super::{DynamicsError, ModelParams, ParticleState};

/// An autonomous-or-not first-order system `y' = f(t, y)`.
pub trait OdeSystem: Sync {
    fn len(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), DynamicsError>;

    /// Returns `(step cap, closest distance, closest pair)` at state `y`.
    /// The default imposes no cap.
    fn guard(&self, _y: &[f64]) -> (f64, f64, (usize, usize)) {
        (f64::INFINITY, f64::INFINITY, (0, 0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOptions {
    /// Absolute bound on the estimated local error per step.
    pub tol: f64,
    /// Step cap factor relative to the shortest pair gap-closing time.
    #[serde(default = "default_safety")]
    pub safety_factor: f64,
    /// Steps below `step_floor * horizon` raise `StepCollapse`.
    #[serde(default = "default_floor")]
    pub step_floor: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_safety() -> f64 {
    0.2
}
fn default_floor() -> f64 {
    1e-12
}
fn default_max_steps() -> usize {
    5_000_000
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            safety_factor: default_safety(),
            step_floor: default_floor(),
            max_steps: default_max_steps(),
        }
    }
}

/// Accepted-step record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    /// Time at the end of the step.
    pub t: f64,
    pub h: f64,
    /// Minimum pair distance at the start of the step.
    pub min_distance: f64,
    /// Estimated local error (max norm).
    pub error: f64,
}

/// View of one accepted step, handed to observers.
pub struct StepView<'a> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64],
    pub y1: &'a [f64],
    pub f0: &'a [f64],
    pub f1: &'a [f64],
}

impl StepView<'_> {
    /// Cubic Hermite interpolant of component `k` at time `t`.
    pub fn interpolate(&self, k: usize, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return self.y1[k];
        }
        let s = (t - self.t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y0[k] + h10 * h * self.f0[k] + h01 * self.y1[k] + h11 * h * self.f1[k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller constants.
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFE: f64 = 0.9;
const FAC_SHRINK_MAX: f64 = 5.0;
const FAC_GROW_MAX: f64 = 10.0;

/// Outcome of [`Dopri5::run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub accepted: usize,
    pub rejected: usize,
    pub stopped_early: bool,
    pub t: f64,
}

/// Embedded 5(4) Runge-Kutta integrator.
pub struct Dopri5<'s, S: OdeSystem> {
    system: &'s S,
    opts: IntegratorOptions,
}

impl<'s, S: OdeSystem> Dopri5<'s, S> {
    pub fn new(system: &'s S, opts: IntegratorOptions) -> Self {
        Self { system, opts }
    }

    /// Integrate from `(t0, y)` through every time in `stops` (ascending,
    /// all `>= t0`). `on_stop` sees the state at each stop, `on_step` sees
    /// every accepted step and may end the run early. `y` holds the final
    /// state on return, also on error.
    pub fn run(
        &self,
        t0: f64,
        y: &mut Vec<f64>,
        stops: &[f64],
        mut on_stop: impl FnMut(f64, &[f64]),
        mut on_step: impl FnMut(&StepView, &StepLog) -> Control,
    ) -> Result<RunStats, (DynamicsError, f64)> {
        let sys = self.system;
        let n = sys.len();
        let span = stops.last().copied().unwrap_or(t0) - t0;
        let floor = self.opts.step_floor * span.max(f64::MIN_POSITIVE);
        let tol = self.opts.tol;

        let mut t = t0;
        let mut f = vec![0.0; n];
        sys.rhs(t, y, &mut f).map_err(|e| (e, t))?;

        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut ytmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];

        let d0 = y.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-3);
        let d1 = f.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-12);
        let mut h = (0.01 * d0 / d1).min(0.1 * span.max(floor)).max(floor);
        let mut err_old: f64 = 1e-4;
        let mut stats = RunStats {
            accepted: 0,
            rejected: 0,
            stopped_early: false,
            t,
        };

        for &stop in stops {
            while t < stop {
                let (cap, min_distance, pair) = sys.guard(y);
                let collapse = |h: f64, t: f64| DynamicsError::StepCollapse {
                    t,
                    h,
                    floor,
                    i: pair.0,
                    j: pair.1,
                    distance: min_distance,
                };
                let mut h_try = h.min(cap);
                let remaining = stop - t;
                let landing = h_try >= remaining;
                if landing {
                    h_try = remaining;
                } else if h_try < floor {
                    return Err((collapse(h_try, t), t));
                }

                // Stages.
                let stage = |ytmp: &mut [f64], coef: &[(f64, &[f64])]| {
                    for i in 0..n {
                        let mut acc = 0.0;
                        for (c, k) in coef {
                            acc += c * k[i];
                        }
                        ytmp[i] = y[i] + h_try * acc;
                    }
                };
                let attempt = (|| -> Result<(), DynamicsError> {
                    stage(&mut ytmp, &[(A21, &f)]);
                    sys.rhs(t + C2 * h_try, &ytmp, &mut k2)?;
                    stage(&mut ytmp, &[(A31, &f), (A32, &k2)]);
                    sys.rhs(t + C3 * h_try, &ytmp, &mut k3)?;
                    stage(&mut ytmp, &[(A41, &f), (A42, &k2), (A43, &k3)]);
                    sys.rhs(t + C4 * h_try, &ytmp, &mut k4)?;
                    stage(&mut ytmp, &[(A51, &f), (A52, &k2), (A53, &k3), (A54, &k4)]);
                    sys.rhs(t + C5 * h_try, &ytmp, &mut k5)?;
                    stage(
                        &mut ytmp,
                        &[(A61, &f), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    );
                    sys.rhs(t + h_try, &ytmp, &mut k6)?;
                    stage(
                        &mut ynew,
                        &[(A71, &f), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                    );
                    sys.rhs(t + h_try, &ynew, &mut k7)?;
                    Ok(())
                })();

                let err = match attempt {
                    Ok(()) => {
                        let mut e = 0.0f64;
                        for i in 0..n {
                            let ei = h_try
                                * (E1 * f[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                                    + E7 * k7[i]);
                            e = e.max(ei.abs());
                        }
                        e
                    }
                    Err(DynamicsError::CollisionalState { .. }) => f64::INFINITY,
                    Err(e) => return Err((e, t)),
                };
                let scaled = err / tol;

                if scaled <= 1.0 {
                    let t_new = if landing { stop } else { t + h_try };
                    let log = StepLog {
                        t: t_new,
                        h: h_try,
                        min_distance,
                        error: err,
                    };
                    let control = on_step(
                        &StepView {
                            t0: t,
                            t1: t_new,
                            y0: y,
                            y1: &ynew,
                            f0: &f,
                            f1: &k7,
                        },
                        &log,
                    );
                    std::mem::swap(y, &mut ynew);
                    std::mem::swap(&mut f, &mut k7);
                    t = t_new;
                    stats.accepted += 1;
                    stats.t = t;

                    let fac11 = scaled.max(1e-16).powf(EXPO1);
                    let fac = (fac11 / err_old.powf(BETA) / SAFE)
                        .clamp(1.0 / FAC_GROW_MAX, FAC_SHRINK_MAX);
                    let h_new = h_try / fac;
                    err_old = scaled.max(1e-4);
                    h = if landing { h.max(h_new) } else { h_new };

                    if control == Control::Stop {
                        stats.stopped_early = true;
                        return Ok(stats);
                    }
                } else {
                    stats.rejected += 1;
                    h = if scaled.is_finite() {
                        let fac11 = scaled.powf(EXPO1);
                        h_try / (fac11 / SAFE).min(FAC_SHRINK_MAX)
                    } else {
                        0.25 * h_try
                    };
                    if h < floor {
                        return Err((collapse(h, t), t));
                    }
                }
                if stats.accepted + stats.rejected >= self.opts.max_steps {
                    return Err((
                        DynamicsError::TooManySteps {
                            t,
                            steps: stats.accepted + stats.rejected,
                        },
                        t,
                    ));
                }
            }
            on_stop(t, y);
        }
        Ok(stats)
    }
}

/// Ordered snapshots of an integrated particle system plus the per-step
/// log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub options: IntegratorOptions,
    pub snapshots: Vec<ParticleState>,
    pub steps: Vec<StepLog>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Index of the snapshot at time `t` (within `1e-12 * horizon`).
    pub fn snapshot_index(&self, t: f64) -> Option<usize> {
        let slack = 1e-12 * self.params.horizon.max(1.0);
        self.snapshots.iter().position(|s| (s.t - t).abs() <= slack)
    }

    pub fn first(&self) -> &ParticleState {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &ParticleState {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    /// Minimum pair distance recorded over all accepted steps and snapshots.
    pub fn min_distance(&self) -> f64 {
        let from_steps = self.steps.iter().map(|s| s.min_distance).fold(f64::INFINITY, f64::min);
        self.snapshots
            .iter()
            .map(super::min_pair_distance)
            .fold(from_steps, f64::min)
    }
}

/// Integration failure carrying everything computed up to the failure.
#[derive(Debug, Clone)]
pub struct IntegrationFailure {
    pub error: DynamicsError,
    pub partial: Trajectory,
}

impl std::fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} snapshots)", self.error, self.partial.snapshots.len())
    }
}

impl std::error::Error for IntegrationFailure {}

impl From<IntegrationFailure> for crate::Error {
    fn from(f: IntegrationFailure) -> Self {
        crate::Error::Dynamics(f.error)
    }
}

/// Integrate with default guard settings and absolute tolerance `tol`.
pub fn integrate(
    initial: &ParticleState,
    params: &ModelParams,
    tol: f64,
    snapshot_times: &[f64],
) -> Result<Trajectory, IntegrationFailure> {
    integrate_with(initial, params, &IntegratorOptions::with_tol(tol), snapshot_times)
}

/// Integrate the particle system from `initial` over `[0, T]`, storing a
/// snapshot at each requested time. `0` and `T` are always included.
pub fn integrate_with(
    initial: &ParticleState,
    params: &ModelParams,
    opts: &IntegratorOptions,
    snapshot_times: &[f64],
) -> Result<Trajectory, IntegrationFailure> {
    let mut traj = Trajectory {
        params: params.clone(),
        options: opts.clone(),
        snapshots: Vec::new(),
        steps: Vec::new(),
    };
    let fail = |error: DynamicsError, traj: Trajectory| IntegrationFailure { error, partial: traj };

    if let Err(e) = validate_inputs(initial, params, opts) {
        return Err(fail(e, traj));
    }
    let stops = match normalize_times(snapshot_times, params.horizon) {
        Ok(s) => s,
        Err(e) => return Err(fail(e, traj)),
    };
    let n = initial.len();
    let sys = AlignmentSystem::new(params, n, opts.safety_factor);
    let dim = initial.dim;
    let mut y = initial.pack();
    let solver = Dopri5::new(&sys, opts.clone());

    let mut snapshots = Vec::with_capacity(stops.len());
    let mut steps = Vec::new();
    let result = solver.run(
        0.0,
        &mut y,
        &stops,
        |t, y| snapshots.push(ParticleState::unpack(t, dim, n, y)),
        |_, log| {
            steps.push(*log);
            Control::Continue
        },
    );
    // The initial snapshot is produced by the `t = 0` stop.
    traj.snapshots = snapshots;
    traj.steps = steps;
    match result {
        Ok(_) => Ok(traj),
        Err((e, _)) => Err(fail(e, traj)),
    }
}

fn validate_inputs(
    initial: &ParticleState,
    params: &ModelParams,
    opts: &IntegratorOptions,
) -> Result<(), DynamicsError> {
    params.validate()?;
    if initial.dim != params.dim {
        return Err(DynamicsError::InvalidState(format!(
            "state dimension {} differs from model dimension {}",
            initial.dim, params.dim
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(DynamicsError::InvalidParams(format!("tol must be > 0, got {}", opts.tol)));
    }
    if !(opts.safety_factor > 0.0) {
        return Err(DynamicsError::InvalidParams("safety_factor must be > 0".into()));
    }
    let scan = super::pair_scan(initial.dim, initial.len(), &initial.positions, &initial.velocities);
    if scan.min_distance == 0.0 {
        let (i, j) = scan.min_distance_pair;
        return Err(DynamicsError::CollisionalState { i, j, distance: 0.0 });
    }
    Ok(())
}

/// Sorted, deduplicated stop times with `0` and `T` included.
fn normalize_times(times: &[f64], horizon: f64) -> Result<Vec<f64>, DynamicsError> {
    let slack = 1e-12 * horizon;
    let mut out = vec![0.0];
    let mut sorted: Vec<f64> = times.to_vec();
    if sorted.iter().any(|t| !t.is_finite() || *t < -slack || *t > horizon + slack) {
        return Err(DynamicsError::InvalidSnapshotTimes(format!(
            "snapshot times must lie in [0, {horizon}]"
        )));
    }
    sorted.sort_by(f64::total_cmp);
    for t in sorted {
        let t = t.clamp(0.0, horizon);
        if t - out.last().unwrap() > slack {
            out.push(t);
        }
    }
    if horizon - out.last().unwrap() > slack {
        out.push(horizon);
    } else {
        *out.last_mut().unwrap() = horizon;
    }
    if out.len() == 1 {
        out.push(horizon);
    }
    Ok(out)
}

/// `k + 1` evenly spaced times on `[0, T]`.
pub fn uniform_times(horizon: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|k| horizon * k as f64 / intervals as f64)
        .collect()
}
