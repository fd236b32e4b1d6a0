use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::exec;
use crate::meanfield::LocalField;
use crate::measures::EmpiricalMeasure;

use super::{
    continuity_residual, dissipation_margin, kinetic_weak_residual, momentum_residual,
    DissipationMargin, Family, KineticResidual, TestFunction, VelocityFactor, WeakformError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticResidualReport {
    pub alpha: f64,
    pub snapshots: usize,
    pub max_spacing: f64,
    pub residuals: Vec<KineticResidual>,
    pub battery_max: f64,
}

/// Kinetic residual of every battery member, evaluated in parallel.
pub fn kinetic_residual_report(
    traj: &Trajectory,
    battery: &[TestFunction],
    alpha: f64,
) -> Result<KineticResidualReport, WeakformError> {
    let residuals = exec::map_slice(battery, |f| kinetic_weak_residual(traj, f, alpha))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let times = traj.times();
    Ok(KineticResidualReport {
        alpha,
        snapshots: times.len(),
        max_spacing: times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
        battery_max: residuals.iter().map(|r| r.residual).fold(0.0, f64::max),
        residuals,
    })
}

/// Momentum component tested by member `idx`: the component of a
/// momentum probe, otherwise `idx mod d`.
pub fn momentum_component(f: &TestFunction, idx: usize, dim: usize) -> usize {
    match (&f.family, &f.velocity) {
        (Family::Momentum, VelocityFactor::Component { index, .. }) => *index,
        _ => idx % dim,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldResidualReport {
    pub alpha: f64,
    pub h: f64,
    pub snapshots: usize,
    pub continuity: Vec<f64>,
    pub momentum: Vec<f64>,
    pub continuity_max: f64,
    pub momentum_max: f64,
    pub dissipation: DissipationMargin,
}

/// Continuity and momentum residuals over the battery plus the
/// dissipation margin, all on binned fields.
pub fn field_residual_report(
    fields: &[LocalField],
    battery: &[TestFunction],
    alpha: f64,
    initial: &EmpiricalMeasure,
) -> Result<FieldResidualReport, WeakformError> {
    super::check_fields(fields)?;
    let dim = fields[0].dim;
    let idx: Vec<usize> = (0..battery.len()).collect();
    let pairs = exec::map_slice(&idx, |&k| -> Result<(f64, f64), WeakformError> {
        let f = &battery[k];
        let c = continuity_residual(fields, f)?;
        let m = momentum_residual(fields, f, momentum_component(f, k, dim), alpha, initial)?;
        Ok((c, m))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let (continuity, momentum): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(FieldResidualReport {
        alpha,
        h: fields[0].h,
        snapshots: fields.len(),
        continuity_max: continuity.iter().copied().fold(0.0, f64::max),
        momentum_max: momentum.iter().copied().fold(0.0, f64::max),
        continuity,
        momentum,
        dissipation: dissipation_margin(fields, alpha)?,
    })
}
