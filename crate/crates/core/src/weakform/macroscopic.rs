use serde::{Deserialize, Serialize};

use crate::dynamics::{dist2, psi_from_dist2};
use crate::exec::{self, KahanSum};
use crate::meanfield::{Cell, LocalField};
use crate::measures::EmpiricalMeasure;

use super::kinetic::require_vanishing;
use super::{trapezoid, TestFunction, WeakformError};

/// Checks that the fields share one grid and have increasing times.
pub fn check_fields(fields: &[LocalField]) -> Result<(), WeakformError> {
    let Some(first) = fields.first() else {
        return Err(WeakformError::InvalidInput("no fields".into()));
    };
    for f in fields {
        if f.dim != first.dim || f.h != first.h {
            return Err(WeakformError::GridMismatch(format!(
                "grid (d={}, h={}) differs from (d={}, h={})",
                f.dim, f.h, first.dim, first.h
            )));
        }
    }
    if fields.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(WeakformError::InvalidInput("field times must increase".into()));
    }
    Ok(())
}

fn times(fields: &[LocalField]) -> Vec<f64> {
    fields.iter().map(|f| f.t).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// `| int phi(0) drho_0 + int_0^T int (d_t phi + grad phi . u) drho_t dt |`
/// for the spatial part `tau(t) S(x)` of `f`.
pub fn continuity_residual(fields: &[LocalField], f: &TestFunction) -> Result<f64, WeakformError> {
    check_fields(fields)?;
    let ts = times(fields);
    require_vanishing(f, *ts.last().unwrap())?;
    let d = fields[0].dim;
    let mut g = vec![0.0; d];
    let mut integrand = Vec::with_capacity(fields.len());
    for field in fields {
        let (tau, dtau) = f.time_factor(field.t);
        let mut acc = KahanSum::new();
        for c in &field.cells {
            let s = f.space_factor(&c.point, &mut g);
            acc.add(c.mass * (dtau * s + tau * dot(&g, &c.mean)));
        }
        integrand.push(acc.value());
    }
    let (tau0, _) = f.time_factor(fields[0].t);
    let init = exec::ksum(
        fields[0]
            .cells
            .iter()
            .map(|c| c.mass * tau0 * f.space_factor(&c.point, &mut g)),
    );
    Ok((init + trapezoid(&ts, &integrand)).abs())
}

/// Pair sum `sum_{c != c'} m m' psi (a_c - a_c') (b_c - b_c')` over
/// distinct cells.
fn cell_pair_sum(cells: &[Cell], alpha: f64, a: &[f64], b: &[f64]) -> f64 {
    let n = cells.len();
    exec::sum_rows(n, |i| {
        let mut row = KahanSum::new();
        for j in 0..n {
            if j == i {
                continue;
            }
            let prod = (a[i] - a[j]) * (b[i] - b[j]);
            if prod == 0.0 {
                continue;
            }
            let r2 = dist2(&cells[i].point, &cells[j].point);
            row.add(cells[j].mass * prod * psi_from_dist2(r2, alpha, None));
        }
        cells[i].mass * row.value()
    })
}

/// Residual of the weak momentum identity tested with `tau S e_k`:
/// `| int u_0 . phi(0) drho_0 + int_0^T int (d_t phi . u + u (u . grad) phi) drho_t dt
///    - 1/2 int_0^T iint_{x != x'} (phi - phi') . (u - u') psi d(rho_t x rho_t) dt |`.
/// The initial momentum comes from the phase-space measure `initial`.
pub fn momentum_residual(
    fields: &[LocalField],
    f: &TestFunction,
    component: usize,
    alpha: f64,
    initial: &EmpiricalMeasure,
) -> Result<f64, WeakformError> {
    check_fields(fields)?;
    let ts = times(fields);
    require_vanishing(f, *ts.last().unwrap())?;
    let d = fields[0].dim;
    if component >= d {
        return Err(WeakformError::InvalidInput(format!("component {component} >= d = {d}")));
    }
    if initial.phase_dim().ok() != Some(d) {
        return Err(WeakformError::GridMismatch(
            "initial data dimension differs from the fields".into(),
        ));
    }
    let mut g = vec![0.0; d];
    let mut integrand = Vec::with_capacity(fields.len());
    for field in fields {
        let (tau, dtau) = f.time_factor(field.t);
        let mut transport = KahanSum::new();
        let mut phi = Vec::with_capacity(field.cells.len());
        for c in &field.cells {
            let s = f.space_factor(&c.point, &mut g);
            let uk = c.mean[component];
            transport.add(c.mass * (dtau * s * uk + tau * uk * dot(&c.mean, &g)));
            phi.push(tau * s);
        }
        let uk: Vec<f64> = field.cells.iter().map(|c| c.mean[component]).collect();
        let align = cell_pair_sum(&field.cells, alpha, &phi, &uk);
        integrand.push(transport.value() - 0.5 * align);
    }
    let (tau0, _) = f.time_factor(ts[0]);
    let init = exec::ksum((0..initial.len()).map(|a| {
        initial.weights[a] * initial.v(a)[component] * tau0 * f.space_factor(initial.x(a), &mut g)
    }));
    Ok((init + trapezoid(&ts, &integrand)).abs())
}

/// Dissipation margin series with a quadrature error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationMargin {
    pub times: Vec<f64>,
    /// `[E(0) - E(t)] - int_0^t D ds` with binned `E` and `D`.
    pub margin: Vec<f64>,
    /// `|I_dt - I_2dt| / 3` for the cumulative time integral.
    pub time_estimate: Vec<f64>,
    /// `|margin_h - margin_2h|` with the margin recomputed on cells of
    /// width `2h`; a first-order Richardson bound in `h`.
    pub space_estimate: Vec<f64>,
    /// `time_estimate + space_estimate`.
    pub quadrature_estimate: Vec<f64>,
}

impl DissipationMargin {
    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Whether every margin is at least minus its quadrature estimate.
    pub fn holds(&self) -> bool {
        self.margin
            .iter()
            .zip(&self.quadrature_estimate)
            .all(|(m, q)| *m >= -q)
    }
}

/// Energy inequality margin on binned fields. Same-cell pairs are excluded
/// from the dissipation.
pub fn dissipation_margin(fields: &[LocalField], alpha: f64) -> Result<DissipationMargin, WeakformError> {
    check_fields(fields)?;
    let (ts, margin, time_estimate) = raw_margin(fields, alpha);
    let coarse: Vec<LocalField> = fields.iter().map(LocalField::coarsen).collect();
    let (_, coarse_margin, _) = raw_margin(&coarse, alpha);
    let space_estimate: Vec<f64> = margin
        .iter()
        .zip(&coarse_margin)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let quadrature_estimate = time_estimate.iter().zip(&space_estimate).map(|(a, b)| a + b).collect();
    Ok(DissipationMargin {
        times: ts,
        margin,
        time_estimate,
        space_estimate,
        quadrature_estimate,
    })
}

fn raw_margin(fields: &[LocalField], alpha: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let ts = times(fields);
    let d = fields[0].dim;
    let mut energy = Vec::with_capacity(fields.len());
    let mut diss = Vec::with_capacity(fields.len());
    for field in fields {
        energy.push(exec::ksum(field.cells.iter().map(|c| c.mass * dot(&c.mean, &c.mean))));
        let mut total = KahanSum::new();
        for k in 0..d {
            let uk: Vec<f64> = field.cells.iter().map(|c| c.mean[k]).collect();
            total.add(cell_pair_sum(&field.cells, alpha, &uk, &uk));
        }
        diss.push(total.value());
    }
    let n = ts.len();
    let mut cumulative = vec![0.0; n];
    let mut acc = KahanSum::new();
    for k in 1..n {
        acc.add(0.5 * (ts[k] - ts[k - 1]) * (diss[k] + diss[k - 1]));
        cumulative[k] = acc.value();
    }
    // Coarse trapezoid on every other point, compared at even indices and
    // carried to odd ones by the fine increment.
    let mut estimate = vec![0.0; n];
    let mut coarse = KahanSum::new();
    for k in 1..n {
        if k % 2 == 0 {
            coarse.add(0.5 * (ts[k] - ts[k - 2]) * (diss[k] + diss[k - 2]));
            estimate[k] = (cumulative[k] - coarse.value()).abs() / 3.0;
        } else {
            estimate[k] = estimate[k - 1];
        }
    }
    let margin = (0..n)
        .map(|k| (energy[0] - energy[k]) - cumulative[k])
        .collect();
    (ts, margin, estimate)
}
