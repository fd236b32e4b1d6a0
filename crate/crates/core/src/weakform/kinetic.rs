use serde::{Deserialize, Serialize};

use crate::dynamics::{psi_from_dist2, dist2, Trajectory};
use crate::exec::{self, KahanSum};

use super::{trapezoid, TestFunction, WeakformError};

/// Terms of the weak kinetic identity
/// `int phi(0) dmu_0 + int_0^T G(t) dt = 0` where
/// `G = int (d_t phi + v . grad_x phi) dmu_t
///      - 1/2 iint_{x != x'} (grad_v phi - grad_v phi') . (v - v') psi d(mu_t x mu_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticResidual {
    pub residual: f64,
    pub initial: f64,
    pub transport: f64,
    pub alignment: f64,
}

pub(super) fn require_vanishing(f: &TestFunction, horizon: f64) -> Result<(), WeakformError> {
    if f.vanishes_after(horizon) {
        Ok(())
    } else {
        Err(WeakformError::NotAdmissible(
            "test function must carry a time window vanishing at the final time".into(),
        ))
    }
}

/// Residual of the weak kinetic identity on an atomic trajectory, with
/// exact atomic sums in phase space and the trapezoid rule on snapshots.
pub fn kinetic_weak_residual(
    traj: &Trajectory,
    f: &TestFunction,
    alpha: f64,
) -> Result<KineticResidual, WeakformError> {
    if traj.snapshots.len() < 2 {
        return Err(WeakformError::InvalidInput("need at least two snapshots".into()));
    }
    let t_end = traj.last().t;
    require_vanishing(f, t_end)?;
    let d = traj.params.dim;
    let mut transport = Vec::with_capacity(traj.snapshots.len());
    let mut alignment = Vec::with_capacity(traj.snapshots.len());
    let mut initial = 0.0;
    for (k, s) in traj.snapshots.iter().enumerate() {
        let n = s.len();
        let w = 1.0 / n as f64;
        let mut gv_all = vec![0.0; n * d];
        let mut gx = vec![0.0; d];
        let mut tr = KahanSum::new();
        let mut phi0 = KahanSum::new();
        for i in 0..n {
            let (x, v) = (s.x(i), s.v(i));
            let (phi, dt) = f.eval(s.t, x, v, &mut gx, &mut gv_all[i * d..(i + 1) * d]);
            let adv: f64 = v.iter().zip(&gx).map(|(a, b)| a * b).sum();
            tr.add(w * (dt + adv));
            phi0.add(w * phi);
        }
        if k == 0 {
            initial = phi0.value();
        }
        let gv = &gv_all;
        let al = exec::sum_rows(n, |i| {
            let gi = &gv[i * d..(i + 1) * d];
            let mut row = KahanSum::new();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let r2 = dist2(s.x(i), s.x(j));
                if r2 == 0.0 {
                    continue;
                }
                let gj = &gv[j * d..(j + 1) * d];
                let dot: f64 = (0..d).map(|c| (gi[c] - gj[c]) * (s.v(i)[c] - s.v(j)[c])).sum();
                if dot != 0.0 {
                    row.add(dot * psi_from_dist2(r2, alpha, None));
                }
            }
            w * w * row.value()
        });
        transport.push(tr.value());
        alignment.push(al);
    }
    let times = traj.times();
    let tr_int = trapezoid(&times, &transport);
    let al_int = trapezoid(&times, &alignment);
    Ok(KineticResidual {
        residual: (initial + tr_int - 0.5 * al_int).abs(),
        initial,
        transport: tr_int,
        alignment: al_int,
    })
}
