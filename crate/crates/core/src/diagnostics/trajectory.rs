use serde::{Deserialize, Serialize};

use crate::dynamics::{dist2, Trajectory};
use crate::exec::{self, KahanSum};
use crate::measures::{dbl, phi_weighted_marginal, EmpiricalMeasure};

use super::{enstrophy, kinetic_energy, DiagnosticsError};

/// Snapshot-wise energy bookkeeping: `E(t_k)`, `D(t_k)`, the cumulative
/// trapezoid integral of `D` and the balance residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub enstrophy: Vec<f64>,
    pub integrated_enstrophy: Vec<f64>,
    /// `int_0^t D ds - (E(0) - E(t))`.
    pub residual: Vec<f64>,
}

impl EnergyBalance {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn energy_balance_series(traj: &Trajectory, alpha: f64) -> Result<EnergyBalance, DiagnosticsError> {
    if traj.snapshots.len() < 2 {
        return Err(DiagnosticsError::InvalidInput(
            "energy balance needs at least two snapshots".into(),
        ));
    }
    let measures: Vec<EmpiricalMeasure> =
        traj.snapshots.iter().map(EmpiricalMeasure::from_particles).collect();
    let mut energy = Vec::with_capacity(measures.len());
    let mut ens = Vec::with_capacity(measures.len());
    for mu in &measures {
        energy.push(kinetic_energy(mu)?);
        ens.push(enstrophy(mu, alpha)?);
    }
    let times = traj.times();
    let mut integral = KahanSum::new();
    let mut integrated = vec![0.0];
    let mut residual = vec![0.0];
    for k in 1..times.len() {
        integral.add(0.5 * (times[k] - times[k - 1]) * (ens[k] + ens[k - 1]));
        integrated.push(integral.value());
        residual.push(integral.value() - (energy[0] - energy[k]));
    }
    Ok(EnergyBalance {
        times,
        energy,
        enstrophy: ens,
        integrated_enstrophy: integrated,
        residual,
    })
}

/// `max_t | int_0^t D ds - (E(0) - E(t)) |` with trapezoid quadrature on the
/// snapshot grid.
pub fn energy_balance_residual(traj: &Trajectory, alpha: f64) -> Result<f64, DiagnosticsError> {
    Ok(energy_balance_series(traj, alpha)?.max_residual())
}

fn snapshot(traj: &Trajectory, t: f64) -> Result<usize, DiagnosticsError> {
    traj.snapshot_index(t)
        .ok_or(DiagnosticsError::SnapshotMissing { t })
}

/// Mass-preservation margin
/// `rho_t(B(c, r + (t - t0) M)) - rho_{t0}(B(c, r))` with closed balls.
pub fn mp_margin(
    traj: &Trajectory,
    t0: f64,
    t: f64,
    center: &[f64],
    radius: f64,
    speed_bound: f64,
) -> Result<f64, DiagnosticsError> {
    if t < t0 {
        return Err(DiagnosticsError::InvalidInput(format!("need t >= t0, got {t} < {t0}")));
    }
    if center.len() != traj.params.dim {
        return Err(DiagnosticsError::InvalidInput(format!(
            "center has dimension {}, trajectory {}",
            center.len(),
            traj.params.dim
        )));
    }
    let s0 = &traj.snapshots[snapshot(traj, t0)?];
    let s1 = &traj.snapshots[snapshot(traj, t)?];
    let inflated = radius + (s1.t - s0.t) * speed_bound;
    let mass_in = |s: &crate::dynamics::ParticleState, r: f64| {
        let inside = (0..s.len()).filter(|&i| dist2(s.x(i), center).sqrt() <= r).count();
        inside as f64 / s.len() as f64
    };
    Ok(mass_in(s1, inflated) - mass_in(s0, radius))
}

/// `dbl(rho_{t0,t}[phi], rho_{t0,t0}[phi])` for each probe time.
pub fn sf_modulus(
    traj: &Trajectory,
    t0: f64,
    phi: impl Fn(&[f64]) -> f64 + Sync + Send,
    probe_times: &[f64],
) -> Result<Vec<(f64, f64)>, DiagnosticsError> {
    let k0 = snapshot(traj, t0)?;
    let idx: Vec<usize> = probe_times
        .iter()
        .map(|&t| snapshot(traj, t))
        .collect::<Result<_, _>>()?;
    let mu0 = EmpiricalMeasure::from_particles(&traj.snapshots[k0]);
    let t0 = traj.snapshots[k0].t;
    let reference = phi_weighted_marginal(&mu0, t0, t0, &phi)?;
    let rows = exec::map_slice(&idx, |&k| -> Result<(f64, f64), DiagnosticsError> {
        let s = &traj.snapshots[k];
        let mu = EmpiricalMeasure::from_particles(s);
        let rho = phi_weighted_marginal(&mu, t0, s.t, &phi)?;
        Ok((s.t, dbl(&rho, &reference)?))
    });
    rows.into_iter().collect()
}
