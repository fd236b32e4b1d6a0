use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{IntegratorOptions, ModelParams, ParticleState, Trajectory};
use crate::Error;

/// One row per snapshot per particle: `t,i,x1..xd,v1..vd`. Floats use the
/// shortest representation that round-trips exactly.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> std::io::Result<()> {
    let d = traj.params.dim;
    let mut header = String::from("t,i");
    for k in 1..=d {
        header.push_str(&format!(",x{k}"));
    }
    for k in 1..=d {
        header.push_str(&format!(",v{k}"));
    }
    writeln!(w, "{header}")?;
    for s in &traj.snapshots {
        for i in 0..s.len() {
            write!(w, "{},{}", s.t, i)?;
            for c in s.x(i) {
                write!(w, ",{c}")?;
            }
            for c in s.v(i) {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Parse a trajectory CSV back into snapshots. The model parameters are
/// not part of the file and must be supplied.
pub fn read_trajectory_csv<R: BufRead>(
    r: R,
    params: &ModelParams,
    options: IntegratorOptions,
) -> Result<Trajectory, Error> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty trajectory file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 4 || cols[0] != "t" || cols[1] != "i" || (cols.len() - 2) % 2 != 0 {
        return Err(Error::Parse(format!("unexpected trajectory header `{header}`")));
    }
    let d = (cols.len() - 2) / 2;
    if d != params.dim {
        return Err(Error::Parse(format!(
            "trajectory has dimension {d}, model expects {}",
            params.dim
        )));
    }
    let mut snapshots: Vec<ParticleState> = Vec::new();
    let mut cur: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        if vals.len() != cols.len() {
            return Err(Error::Parse(format!("line {}: wrong column count", lineno + 2)));
        }
        let t = vals[0];
        if cur.as_ref().is_some_and(|(tc, _, _)| *tc != t) {
            let (tc, x, v) = cur.take().unwrap();
            snapshots.push(ParticleState::new(tc, d, x, v)?);
        }
        let entry = cur.get_or_insert_with(|| (t, Vec::new(), Vec::new()));
        entry.1.extend_from_slice(&vals[2..2 + d]);
        entry.2.extend_from_slice(&vals[2 + d..]);
    }
    if let Some((tc, x, v)) = cur {
        snapshots.push(ParticleState::new(tc, d, x, v)?);
    }
    if snapshots.is_empty() {
        return Err(Error::Parse("trajectory file has no rows".into()));
    }
    if snapshots.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Parse("snapshot times must be strictly increasing".into()));
    }
    Ok(Trajectory {
        params: params.clone(),
        options,
        snapshots,
        steps: Vec::new(),
    })
}

/// Compact JSON summary of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub params: ModelParams,
    pub options: IntegratorOptions,
    pub n_snapshots: usize,
    pub accepted_steps: usize,
    pub min_step: f64,
    pub max_step: f64,
    pub max_local_error: f64,
    pub min_pair_distance: f64,
    pub initial_max_speed: f64,
    pub final_max_speed: f64,
    pub momentum_drift: f64,
}

pub fn trajectory_summary(traj: &Trajectory) -> TrajectorySummary {
    let p0 = traj.first().momentum_sum();
    let drift = traj
        .snapshots
        .iter()
        .map(|s| {
            s.momentum_sum()
                .iter()
                .zip(&p0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    TrajectorySummary {
        params: traj.params.clone(),
        options: traj.options.clone(),
        n_snapshots: traj.snapshots.len(),
        accepted_steps: traj.steps.len(),
        min_step: traj.steps.iter().map(|s| s.h).fold(f64::INFINITY, f64::min),
        max_step: traj.steps.iter().map(|s| s.h).fold(0.0, f64::max),
        max_local_error: traj.steps.iter().map(|s| s.error).fold(0.0, f64::max),
        min_pair_distance: traj.min_distance(),
        initial_max_speed: traj.first().max_speed(),
        final_max_speed: traj.last().max_speed(),
        momentum_drift: drift,
    }
}
