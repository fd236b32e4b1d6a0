use super::{EmpiricalMeasure, MeasureError, Space};

/// Free-transport shift `(x, v) -> (x - (t - t0) v, v)` applied atomwise.
pub fn pushforward_t(mu: &EmpiricalMeasure, t0: f64, t: f64) -> Result<EmpiricalMeasure, MeasureError> {
    let d = mu.phase_dim()?;
    let s = t - t0;
    let mut points = mu.points.clone();
    for p in points.chunks_mut(2 * d) {
        let (x, v) = p.split_at_mut(d);
        for k in 0..d {
            x[k] -= s * v[k];
        }
    }
    EmpiricalMeasure::new_finite(2 * d, Space::Phase, points, mu.weights.clone())
}

/// Spatial measure `rho_{t0,t}[phi]`: an atom at `x - (t - t0) v` with
/// weight `w phi(v)` for every phase-space atom.
pub fn phi_weighted_marginal(
    mu: &EmpiricalMeasure,
    t0: f64,
    t: f64,
    phi: impl Fn(&[f64]) -> f64,
) -> Result<EmpiricalMeasure, MeasureError> {
    let d = mu.phase_dim()?;
    let s = t - t0;
    let mut points = Vec::with_capacity(mu.len() * d);
    let mut weights = Vec::with_capacity(mu.len());
    for a in 0..mu.len() {
        let (x, v) = (mu.x(a), mu.v(a));
        let f = phi(v);
        if !(f >= 0.0) {
            return Err(MeasureError::Invalid(format!("velocity weight {f} is negative")));
        }
        weights.push(mu.weights[a] * f);
        points.extend(x.iter().zip(v).map(|(xi, vi)| xi - s * vi));
    }
    EmpiricalMeasure::new_finite(d, Space::Plain, points, weights)
}
