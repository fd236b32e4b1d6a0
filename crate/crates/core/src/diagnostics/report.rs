use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{min_pair_distance, ModelParams, Trajectory};
use crate::meanfield::{local_fields, mk_index};
use crate::measures::EmpiricalMeasure;

use super::{dalpha, energy_balance_series, enstrophy, eta_monokineticity, kinetic_energy, momentum, DiagnosticsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub dalpha: f64,
    /// One value per entry of the report's eta ladder.
    pub eeta: Vec<f64>,
    /// One value per entry of the report's bin widths.
    pub mk_var: Vec<f64>,
    pub momentum: Vec<f64>,
    pub min_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub params: ModelParams,
    pub eta_ladder: Vec<f64>,
    pub bin_widths: Vec<f64>,
    pub energy_balance_residual: f64,
    pub max_energy_increase: f64,
    pub snapshots: Vec<SnapshotDiagnostics>,
}

/// Evaluate every functional at every snapshot.
pub fn diagnostics_report(
    traj: &Trajectory,
    eta_ladder: &[f64],
    bin_widths: &[f64],
) -> Result<DiagnosticsReport, DiagnosticsError> {
    let alpha = traj.params.alpha;
    if bin_widths.iter().any(|h| !(*h > 0.0)) {
        return Err(DiagnosticsError::InvalidInput("bin widths must be > 0".into()));
    }
    let snapshots = traj
        .snapshots
        .iter()
        .map(|s| -> Result<SnapshotDiagnostics, DiagnosticsError> {
            let mu = EmpiricalMeasure::from_particles(s);
            let eeta = eta_ladder
                .iter()
                .map(|&eta| eta_monokineticity(&mu, eta, alpha))
                .collect::<Result<_, _>>()?;
            let mk_var = bin_widths
                .iter()
                .map(|&h| local_fields(&mu, h).map(|f| mk_index(&f)))
                .collect::<Result<_, _>>()?;
            Ok(SnapshotDiagnostics {
                t: s.t,
                energy: kinetic_energy(&mu)?,
                enstrophy: enstrophy(&mu, alpha)?,
                dalpha: dalpha(&mu, alpha, 0.0)?,
                eeta,
                mk_var,
                momentum: momentum(&mu)?,
                min_distance: min_pair_distance(s),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let balance = if snapshots.len() >= 2 {
        energy_balance_series(traj, alpha)?.max_residual()
    } else {
        0.0
    };
    let max_energy_increase = snapshots
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(0.0, f64::max);
    Ok(DiagnosticsReport {
        params: traj.params.clone(),
        eta_ladder: eta_ladder.to_vec(),
        bin_widths: bin_widths.to_vec(),
        energy_balance_residual: balance,
        max_energy_increase,
        snapshots,
    })
}

/// Per-snapshot series `t,E,D,Dalpha,p1..pd,min_distance`.
pub fn write_series_csv<W: Write>(report: &DiagnosticsReport, mut w: W) -> std::io::Result<()> {
    let d = report.params.dim;
    let mut header = String::from("t,E,D,Dalpha");
    for k in 1..=d {
        header.push_str(&format!(",p{k}"));
    }
    header.push_str(",min_distance");
    writeln!(w, "{header}")?;
    for s in &report.snapshots {
        write!(w, "{},{},{},{}", s.t, s.energy, s.enstrophy, s.dalpha)?;
        for p in &s.momentum {
            write!(w, ",{p}")?;
        }
        writeln!(w, ",{}", s.min_distance)?;
    }
    Ok(())
}
