use crate::dynamics::{dist2, psi_from_dist2};
use crate::exec::{self, KahanSum};
use crate::measures::{disintegrate, EmpiricalMeasure, MeasureError};

use super::DiagnosticsError;

pub const DEFAULT_ETA_LADDER: [f64; 5] = [1.0, 0.3, 0.1, 0.03, 0.01];

/// `E = sum_a w_a |v_a|^2`.
pub fn kinetic_energy(mu: &EmpiricalMeasure) -> Result<f64, MeasureError> {
    mu.phase_dim()?;
    Ok(exec::ksum((0..mu.len()).map(|a| {
        mu.weights[a] * mu.v(a).iter().map(|c| c * c).sum::<f64>()
    })))
}

/// `sum_a w_a v_a`.
pub fn momentum(mu: &EmpiricalMeasure) -> Result<Vec<f64>, MeasureError> {
    let d = mu.phase_dim()?;
    Ok((0..d)
        .map(|k| exec::ksum((0..mu.len()).map(|a| mu.weights[a] * mu.v(a)[k])))
        .collect())
}

/// Off-diagonal pair sum `sum_{a != b} w_a w_b f(|x_a - x_b|, |v_a - v_b|^2)`
/// with rows evaluated in parallel. `skip_colocated` drops pairs with
/// `x_a = x_b`.
fn pair_sum(
    mu: &EmpiricalMeasure,
    skip_colocated: bool,
    f: impl Fn(f64, f64) -> f64 + Sync + Send,
) -> f64 {
    let n = mu.len();
    exec::sum_rows(n, |a| {
        let (xa, va, wa) = (mu.x(a), mu.v(a), mu.weights[a]);
        let mut row = KahanSum::new();
        for b in 0..n {
            if b == a {
                continue;
            }
            let dv2 = dist2(va, mu.v(b));
            if dv2 == 0.0 {
                continue;
            }
            let r2 = dist2(xa, mu.x(b));
            if r2 == 0.0 && skip_colocated {
                continue;
            }
            row.add(mu.weights[b] * f(r2, dv2));
        }
        wa * row.value()
    })
}

/// `D = sum_{a != b, x_a != x_b} w_a w_b |v_a - v_b|^2 |x_a - x_b|^-alpha`.
pub fn enstrophy(mu: &EmpiricalMeasure, alpha: f64) -> Result<f64, MeasureError> {
    mu.phase_dim()?;
    Ok(pair_sum(mu, true, |r2, dv2| dv2 * psi_from_dist2(r2, alpha, None)))
}

/// `sum_{a != b} w_a w_b |v_a - v_b|^{alpha+2} / (|x_a - x_b| + eta)^alpha`.
/// At `eta = 0` co-located pairs are excluded.
pub fn dalpha(mu: &EmpiricalMeasure, alpha: f64, eta: f64) -> Result<f64, MeasureError> {
    mu.phase_dim()?;
    if !(eta >= 0.0) {
        return Err(MeasureError::Invalid(format!("eta must be >= 0, got {eta}")));
    }
    let half = 0.5 * (alpha + 2.0);
    Ok(pair_sum(mu, eta == 0.0, |r2, dv2| {
        dv2.powf(half) * (r2.sqrt() + eta).powf(-alpha)
    }))
}

/// `int_{R^d} (|x| + eta)^-alpha dx` for `alpha > d`, and `1` at `alpha = d`.
pub fn beta_eta(eta: f64, alpha: f64, dim: usize) -> Result<f64, DiagnosticsError> {
    if !(eta > 0.0) {
        return Err(DiagnosticsError::InvalidInput(format!("eta must be > 0, got {eta}")));
    }
    if dim == 0 || dim > 2 {
        return Err(DiagnosticsError::Unsupported(format!(
            "closed form only for d in {{1, 2}}, got d = {dim}"
        )));
    }
    let d = dim as f64;
    if alpha < d {
        return Err(DiagnosticsError::DivergentNormalization { alpha, dim });
    }
    if alpha == d {
        return Ok(1.0);
    }
    Ok(match dim {
        1 => 2.0 * eta.powf(1.0 - alpha) / (alpha - 1.0),
        _ => {
            2.0 * std::f64::consts::PI
                * eta.powf(2.0 - alpha)
                * (1.0 / (alpha - 2.0) - 1.0 / (alpha - 1.0))
        }
    })
}

/// `E_eta = sum_{a,b} w_a w_b |v_a - u(x_a)|^{alpha+2} / (|x_a - x_b| + eta)^alpha`
/// with `u` the exact conditional mean velocity at each position.
pub fn eta_monokineticity(mu: &EmpiricalMeasure, eta: f64, alpha: f64) -> Result<f64, MeasureError> {
    mu.phase_dim()?;
    if !(eta > 0.0) {
        return Err(MeasureError::Invalid(format!("eta must be > 0, got {eta}")));
    }
    let dis = disintegrate(mu, 0.0)?;
    let index = dis.group_index(mu.len());
    let half = 0.5 * (alpha + 2.0);
    let n = mu.len();
    Ok(exec::sum_rows(n, |a| {
        let Some(g) = index[a] else { return 0.0 };
        let dev2 = dist2(mu.v(a), &dis.groups[g].mean);
        if dev2 == 0.0 {
            return 0.0;
        }
        let xa = mu.x(a);
        let row = exec::ksum(
            (0..n).map(|b| mu.weights[b] * (dist2(xa, mu.x(b)).sqrt() + eta).powf(-alpha)),
        );
        mu.weights[a] * dev2.powf(half) * row
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Space;

    fn phase1(atoms: &[(f64, f64, f64)]) -> EmpiricalMeasure {
        let points = atoms.iter().flat_map(|a| [a.0, a.1]).collect();
        let weights = atoms.iter().map(|a| a.2).collect();
        EmpiricalMeasure::new(2, Space::Phase, points, weights).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert_eq!(kinetic_energy(&phase1(&[(0.0, 5.0, 1.0)])).unwrap(), 25.0);
        assert_eq!(kinetic_energy(&phase1(&[(0.0, 0.0, 0.5), (1.0, 2.0, 0.5)])).unwrap(), 2.0);
    }

    #[test]
    fn enstrophy_examples() {
        let mu = phase1(&[(0.0, 0.0, 0.5), (1.0, 1.0, 0.5)]);
        assert!((enstrophy(&mu, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let co = phase1(&[(0.0, 1.0, 0.5), (0.0, -1.0, 0.5)]);
        assert_eq!(enstrophy(&co, 1.5).unwrap(), 0.0);
        assert_eq!(dalpha(&co, 1.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dalpha_example() {
        let mu = phase1(&[(0.0, 0.0, 0.5), (1.0, 2.0, 0.5)]);
        assert!((dalpha(&mu, 1.0, 0.0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn beta_closed_forms() {
        assert_eq!(beta_eta(0.3, 1.0, 1).unwrap(), 1.0);
        assert_eq!(beta_eta(0.3, 2.0, 2).unwrap(), 1.0);
        assert!((beta_eta(0.5, 2.0, 1).unwrap() - 4.0).abs() < 1e-14);
        assert!(matches!(
            beta_eta(0.5, 1.5, 2),
            Err(DiagnosticsError::DivergentNormalization { .. })
        ));
        assert!(matches!(beta_eta(0.5, 4.0, 3), Err(DiagnosticsError::Unsupported(_))));
    }

    #[test]
    fn monokineticity_of_split_pair() {
        let mu = phase1(&[(0.0, 1.0, 0.5), (0.0, -1.0, 0.5)]);
        let eta: f64 = 0.1;
        let alpha = 1.0;
        let e = eta_monokineticity(&mu, eta, alpha).unwrap();
        assert!((e - eta.powf(-alpha)).abs() < 1e-12 * e);
        let d = dalpha(&mu, alpha, eta).unwrap();
        assert!(e <= 2f64.powf(alpha + 1.0) * d);
        let distinct = phase1(&[(0.0, 1.0, 0.5), (1.0, -1.0, 0.5)]);
        assert_eq!(eta_monokineticity(&distinct, eta, alpha).unwrap(), 0.0);
    }
}
