//! Dense tableau simplex for `max c.x` subject to `A x <= b`, `x >= 0`,
//! with `b >= 0` so the origin is feasible. Bland's rule picks both the
//! entering and the leaving variable, which rules out cycling on the highly
//! degenerate constraint sets that Lipschitz conditions produce.

use super::MeasureError;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// Optimal dual multipliers, one per constraint row.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

/// `a` holds `m` rows of length `n`, row-major.
pub fn maximize(c: &[f64], a: &[f64], b: &[f64]) -> Result<LpSolution, MeasureError> {
    let n = c.len();
    let m = b.len();
    if a.len() != m * n {
        return Err(MeasureError::Lp(format!(
            "constraint matrix has {} entries, expected {m}x{n}",
            a.len()
        )));
    }
    if b.iter().any(|bi| !(*bi >= 0.0)) {
        return Err(MeasureError::Lp("right-hand side must be nonnegative".into()));
    }
    // Columns 0..n are structural, n..n+m slacks, last column is the rhs.
    let w = n + m + 1;
    let mut t = vec![0.0; (m + 1) * w];
    for i in 0..m {
        t[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        t[i * w + n + i] = 1.0;
        t[i * w + w - 1] = b[i];
    }
    // Objective row stores reduced costs c_j - z_j.
    let obj = m * w;
    t[obj..obj + n].copy_from_slice(c);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (m + n) + 1000;
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + m).find(|&j| t[obj + j] > EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let aij = t[i * w + enter];
            if aij > EPS {
                let ratio = t[i * w + w - 1] / aij;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[l]),
                };
                if better {
                    best = ratio.min(best);
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            return Err(MeasureError::Lp("unbounded objective".into()));
        };
        pivot(&mut t, w, m, r, enter);
        basis[r] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(MeasureError::Lp(format!("no convergence after {pivots} pivots")));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i * w + w - 1];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let duals = (0..m).map(|i| (-t[obj + n + i]).max(0.0)).collect();
    Ok(LpSolution {
        value,
        x,
        duals,
        pivots,
    })
}

fn pivot(t: &mut [f64], w: usize, m: usize, r: usize, col: usize) {
    let p = t[r * w + col];
    for j in 0..w {
        t[r * w + j] /= p;
    }
    t[r * w + col] = 1.0;
    let (before, rest) = t.split_at_mut(r * w);
    let (row, after) = rest.split_at_mut(w);
    let eliminate = |other: &mut [f64]| {
        let f = other[col];
        if f != 0.0 {
            for j in 0..w {
                other[j] -= f * row[j];
            }
            other[col] = 0.0;
        }
    };
    before.chunks_mut(w).for_each(eliminate);
    // `after` holds the remaining constraint rows and the objective row.
    debug_assert_eq!(after.len(), (m - r) * w);
    after.chunks_mut(w).for_each(eliminate);
}
