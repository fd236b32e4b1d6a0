use crate::exec::{self, KahanSum};

use super::integrate::OdeSystem;
use super::state::dist2;
use super::{DynamicsError, ModelParams, ParticleState, MAX_DIM};

/// Communication weight `psi(|x|) = |x|^-alpha` given the squared distance.
#[inline]
pub(crate) fn psi_from_dist2(r2: f64, alpha: f64, floor: Option<f64>) -> f64 {
    match floor {
        Some(eps) => {
            let d = r2.sqrt().max(eps);
            d.powf(-alpha)
        }
        None => {
            if alpha == 1.0 {
                1.0 / r2.sqrt()
            } else if alpha == 2.0 {
                1.0 / r2
            } else {
                r2.powf(-0.5 * alpha)
            }
        }
    }
}

struct Row {
    accel: [f64; MAX_DIM],
    dissipation: f64,
}

/// One row of the interaction sum: `sum_{j != i} psi_ij (v_j - v_i)` and
/// `sum_{j != i} psi_ij |v_i - v_j|^2`, each accumulated in `j` order.
#[inline]
fn interaction_row(
    i: usize,
    dim: usize,
    n: usize,
    x: &[f64],
    v: &[f64],
    alpha: f64,
    floor: Option<f64>,
) -> Result<Row, DynamicsError> {
    let xi = &x[i * dim..(i + 1) * dim];
    let vi = &v[i * dim..(i + 1) * dim];
    let mut acc = [KahanSum::new(); MAX_DIM];
    let mut diss = KahanSum::new();
    for j in 0..n {
        if j == i {
            continue;
        }
        let xj = &x[j * dim..(j + 1) * dim];
        let vj = &v[j * dim..(j + 1) * dim];
        let r2 = dist2(xi, xj);
        let psi = psi_from_dist2(r2, alpha, floor);
        if r2 == 0.0 && floor.is_none() || !psi.is_finite() {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            return Err(DynamicsError::CollisionalState {
                i: a,
                j: b,
                distance: r2.sqrt(),
            });
        }
        let mut dv2 = 0.0;
        for k in 0..dim {
            let dv = vj[k] - vi[k];
            acc[k].add(psi * dv);
            dv2 += dv * dv;
        }
        diss.add(psi * dv2);
    }
    let mut accel = [0.0; MAX_DIM];
    for k in 0..dim {
        accel[k] = acc[k].value();
    }
    Ok(Row {
        accel,
        dissipation: diss.value(),
    })
}

/// Writes `dv` into `out` (length `n*dim`) and returns the enstrophy
/// `(1/N^2) sum_{i != j} psi_ij |v_i - v_j|^2`.
pub(crate) fn accel_into(
    dim: usize,
    n: usize,
    x: &[f64],
    v: &[f64],
    alpha: f64,
    floor: Option<f64>,
    out: &mut [f64],
) -> Result<f64, DynamicsError> {
    let rows = exec::map_indices(n, |i| interaction_row(i, dim, n, x, v, alpha, floor));
    let inv_n = 1.0 / n as f64;
    let mut diss = KahanSum::new();
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        for k in 0..dim {
            out[i * dim + k] = inv_n * row.accel[k];
        }
        diss.add(row.dissipation);
    }
    Ok(diss.value() * inv_n * inv_n)
}

/// Right-hand side of the particle system: `dx_i = v_i`,
/// `dv_i = (1/N) sum_{j != i} |x_i - x_j|^-alpha (v_j - v_i)`.
pub fn alignment_rhs(
    state: &ParticleState,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
    let n = state.len();
    let mut dv = vec![0.0; state.velocities.len()];
    accel_into(
        state.dim,
        n,
        &state.positions,
        &state.velocities,
        params.alpha,
        params.kernel_floor,
        &mut dv,
    )?;
    Ok((state.velocities.clone(), dv))
}

/// Closest-approach statistics of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScan {
    pub min_distance: f64,
    pub min_distance_pair: (usize, usize),
    /// `min_{i != j} |x_i - x_j| / |v_i - v_j|`, the shortest time scale on
    /// which any pair can close its gap.
    pub min_gap_time: f64,
    pub min_gap_time_pair: (usize, usize),
}

pub fn pair_scan(dim: usize, n: usize, x: &[f64], v: &[f64]) -> PairScan {
    struct RowMin {
        d2: f64,
        jd: usize,
        gap: f64,
        jg: usize,
    }
    let rows = exec::map_indices(n, |i| {
        let xi = &x[i * dim..(i + 1) * dim];
        let vi = &v[i * dim..(i + 1) * dim];
        let mut r = RowMin {
            d2: f64::INFINITY,
            jd: i,
            gap: f64::INFINITY,
            jg: i,
        };
        for j in (i + 1)..n {
            let d2 = dist2(xi, &x[j * dim..(j + 1) * dim]);
            if d2 < r.d2 {
                r.d2 = d2;
                r.jd = j;
            }
            let w2 = dist2(vi, &v[j * dim..(j + 1) * dim]);
            if w2 > 0.0 {
                let gap = (d2 / w2).sqrt();
                if gap < r.gap {
                    r.gap = gap;
                    r.jg = j;
                }
            }
        }
        r
    });
    let mut scan = PairScan {
        min_distance: f64::INFINITY,
        min_distance_pair: (0, 0),
        min_gap_time: f64::INFINITY,
        min_gap_time_pair: (0, 0),
    };
    let mut best_d2 = f64::INFINITY;
    for (i, r) in rows.into_iter().enumerate() {
        if r.d2 < best_d2 {
            best_d2 = r.d2;
            scan.min_distance_pair = (i, r.jd);
        }
        if r.gap < scan.min_gap_time {
            scan.min_gap_time = r.gap;
            scan.min_gap_time_pair = (i, r.jg);
        }
    }
    scan.min_distance = best_d2.sqrt();
    scan
}

/// `min_{i != j} |x_i - x_j|`; `+inf` when there are fewer than two
/// particles.
pub fn min_pair_distance(state: &ParticleState) -> f64 {
    pair_scan(state.dim, state.len(), &state.positions, &state.velocities).min_distance
}

/// The particle system as an ODE on `[x, v]`, optionally augmented with a
/// trailing scalar that accumulates `int_0^t D ds`.
#[derive(Debug, Clone)]
pub struct AlignmentSystem {
    pub dim: usize,
    pub n: usize,
    pub alpha: f64,
    pub kernel_floor: Option<f64>,
    pub track_dissipation: bool,
    /// Step cap factor: `h <= safety * min gap time`.
    pub safety_factor: f64,
}

impl AlignmentSystem {
    pub fn new(params: &ModelParams, n: usize, safety_factor: f64) -> Self {
        Self {
            dim: params.dim,
            n,
            alpha: params.alpha,
            kernel_floor: params.kernel_floor,
            track_dissipation: false,
            safety_factor,
        }
    }

    pub fn with_dissipation(mut self) -> Self {
        self.track_dissipation = true;
        self
    }
}

impl OdeSystem for AlignmentSystem {
    fn len(&self) -> usize {
        2 * self.n * self.dim + usize::from(self.track_dissipation)
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), DynamicsError> {
        let half = self.n * self.dim;
        let (x, rest) = y.split_at(half);
        let v = &rest[..half];
        dy[..half].copy_from_slice(v);
        let d = accel_into(
            self.dim,
            self.n,
            x,
            v,
            self.alpha,
            self.kernel_floor,
            &mut dy[half..2 * half],
        )?;
        if self.track_dissipation {
            dy[2 * half] = d;
        }
        Ok(())
    }

    fn guard(&self, y: &[f64]) -> (f64, f64, (usize, usize)) {
        let half = self.n * self.dim;
        let scan = pair_scan(self.dim, self.n, &y[..half], &y[half..2 * half]);
        let cap = self.safety_factor * scan.min_gap_time;
        (cap, scan.min_distance, scan.min_distance_pair)
    }
}
