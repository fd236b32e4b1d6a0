use serde::{Deserialize, Serialize};

use crate::dynamics::{
    AlignmentSystem, Control, Dopri5, IntegratorOptions, ModelParams, ParticleState, StepView,
};

use super::MeanfieldError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub eps: f64,
    /// First time the velocity gap halves; `None` if not reached by `T`.
    pub t_half: Option<f64>,
    /// `int_0^{t_half} D dt` (up to `T` when the gap never halves).
    pub integrated_dissipation: f64,
    pub initial_energy: f64,
    pub accepted_steps: usize,
    pub min_distance: f64,
}

fn gap(view: &StepView, d: usize, t: f64) -> f64 {
    (0..d)
        .map(|k| {
            let a = view.interpolate(2 * d + k, t);
            let b = view.interpolate(3 * d + k, t);
            (a - b) * (a - b)
        })
        .sum::<f64>()
        .sqrt()
}

/// Two particles at `-eps/2` and `+eps/2` on the first axis with
/// velocities `v1` and `v2`; records when `|v1(t) - v2(t)|` first drops to
/// half its initial value.
pub fn pair_alignment_study(
    eps_list: &[f64],
    v1: &[f64],
    v2: &[f64],
    params: &ModelParams,
    opts: &IntegratorOptions,
) -> Result<Vec<PairRow>, MeanfieldError> {
    let d = params.dim;
    if v1.len() != d || v2.len() != d {
        return Err(MeanfieldError::InvalidInput("velocities must have dimension d".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(MeanfieldError::InvalidInput("separations must be > 0".into()));
    }
    let mut p = params.clone();
    p.n_particles = 2;
    p.validate()?;
    let g0 = v1.iter().zip(v2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let initial_energy = 0.5 * v1.iter().chain(v2).map(|c| c * c).sum::<f64>();

    eps_list
        .iter()
        .map(|&eps| {
            let mut x = vec![0.0; 2 * d];
            x[0] = -0.5 * eps;
            x[d] = 0.5 * eps;
            let state = ParticleState::new(0.0, d, x, [v1, v2].concat())?;
            if g0 == 0.0 {
                return Ok(PairRow {
                    eps,
                    t_half: Some(0.0),
                    integrated_dissipation: 0.0,
                    initial_energy,
                    accepted_steps: 0,
                    min_distance: eps,
                });
            }
            let sys = AlignmentSystem::new(&p, 2, opts.safety_factor).with_dissipation();
            let solver = Dopri5::new(&sys, opts.clone());
            let mut y = state.pack();
            y.push(0.0);
            let acc = 4 * d;
            let mut t_half = None;
            let mut integral = 0.0;
            let mut min_distance = eps;
            let target = 0.5 * g0;
            let res = solver.run(
                0.0,
                &mut y,
                &[p.horizon],
                |_, _| {},
                |view, log| {
                    min_distance = min_distance.min(log.min_distance);
                    if gap(view, d, view.t1) > target {
                        return Control::Continue;
                    }
                    let (mut lo, mut hi) = (view.t0, view.t1);
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if gap(view, d, mid) > target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
                            break;
                        }
                    }
                    t_half = Some(hi);
                    integral = view.interpolate(acc, hi);
                    Control::Stop
                },
            );
            let stats = res.map_err(|(source, _)| MeanfieldError::PairRun { eps, source })?;
            if t_half.is_none() {
                integral = y[acc];
            }
            Ok(PairRow {
                eps,
                t_half,
                integrated_dissipation: integral,
                initial_energy,
                accepted_steps: stats.accepted,
                min_distance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_velocities_align_immediately() {
        let p = ModelParams::new(1, 1.0, 2, 1.0, 1.0);
        let rows = pair_alignment_study(&[0.5], &[0.3], &[0.3], &p, &IntegratorOptions::with_tol(1e-10)).unwrap();
        assert_eq!(rows[0].t_half, Some(0.0));
    }

    #[test]
    fn symmetric_pair_half_time() {
        // d=1, alpha=1: with r the distance and g the velocity gap,
        // r' = g and g' = -g / r, so g = g0 - ln(r / eps).
        let p = ModelParams::new(1, 1.0, 2, 2.0, 1.0);
        let rows = pair_alignment_study(&[0.5, 0.25], &[-0.1], &[0.1], &p, &IntegratorOptions::with_tol(1e-10)).unwrap();
        let (a, b) = (rows[0].t_half.unwrap(), rows[1].t_half.unwrap());
        assert!(b < a);
        for r in &rows {
            assert!(r.integrated_dissipation <= r.initial_energy + 1e-9);
            assert!(r.integrated_dissipation > 0.0);
        }
    }
}
