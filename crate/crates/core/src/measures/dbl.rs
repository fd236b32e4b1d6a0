use serde::{Deserialize, Serialize};

use super::{lp, EmpiricalMeasure, MeasureError};
use crate::exec;

pub const DEFAULT_SUPPORT_CAP: usize = 2000;

/// Union supports up to this size go to the dense simplex under `Auto`.
const DENSE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DblMethod {
    #[default]
    Auto,
    /// Dense simplex over all pairwise Lipschitz constraints.
    Dense,
    /// Min-cost flow on the dual transshipment problem.
    Flow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DblOptions {
    pub support_cap: usize,
    pub method: DblMethod,
}

impl Default for DblOptions {
    fn default() -> Self {
        Self {
            support_cap: DEFAULT_SUPPORT_CAP,
            method: DblMethod::Auto,
        }
    }
}

/// Optimal value and an optimal potential on the union support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DblSolution {
    pub value: f64,
    pub dim: usize,
    /// Union support, flat row-major.
    pub points: Vec<f64>,
    /// `mu_k - nu_k` on the union support.
    pub signed_mass: Vec<f64>,
    /// Optimal test-function values `phi_k`.
    pub potentials: Vec<f64>,
}

impl DblSolution {
    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    /// Largest violation of `|phi| <= 1` and `|phi_k - phi_l| <= |p_k - p_l|`.
    pub fn max_violation(&self) -> f64 {
        let k = self.len();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            worst = worst.max(self.potentials[a].abs() - 1.0);
            for b in a + 1..k {
                let gap = (self.potentials[a] - self.potentials[b]).abs();
                worst = worst.max(gap - crate::dynamics::dist2(self.point(a), self.point(b)).sqrt());
            }
        }
        worst.max(0.0)
    }

    /// `sum_k (mu_k - nu_k) phi_k`.
    pub fn objective(&self) -> f64 {
        exec::ksum(self.signed_mass.iter().zip(&self.potentials).map(|(s, p)| s * p))
    }
}

/// Bounded-Lipschitz distance with default options.
pub fn dbl(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64, MeasureError> {
    Ok(dbl_with(mu, nu, &DblOptions::default())?.value)
}

/// Exact `sup { int phi d(mu - nu) : |phi| <= 1, Lip(phi) <= 1 }`.
pub fn dbl_with(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    opts: &DblOptions,
) -> Result<DblSolution, MeasureError> {
    if mu.dim != nu.dim {
        return Err(MeasureError::DimensionMismatch(mu.dim, nu.dim));
    }
    let dim = mu.dim;
    let (points, signed_mass) = union_support(mu, nu);
    let k = signed_mass.len();
    if k > opts.support_cap {
        return Err(MeasureError::SupportTooLarge {
            size: k,
            cap: opts.support_cap,
        });
    }
    let dense = match opts.method {
        DblMethod::Dense => true,
        DblMethod::Flow => false,
        DblMethod::Auto => k <= DENSE_LIMIT,
    };
    let potentials = if k == 0 {
        Vec::new()
    } else if dense {
        solve_dense(dim, &points, &signed_mass)?
    } else {
        solve_flow(dim, &points, &signed_mass)?.1
    };
    let mut sol = DblSolution {
        value: 0.0,
        dim,
        points,
        signed_mass,
        potentials,
    };
    sol.value = sol.objective().max(0.0);
    Ok(sol)
}

/// Distinct points of both measures with their signed masses, in
/// lexicographic order.
fn union_support(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> (Vec<f64>, Vec<f64>) {
    let dim = mu.dim;
    let mut atoms: Vec<(&[f64], f64)> = (0..mu.len())
        .map(|a| (mu.point(a), mu.weights[a]))
        .chain((0..nu.len()).map(|a| (nu.point(a), -nu.weights[a])))
        .collect();
    atoms.sort_by(|a, b| {
        a.0.iter()
            .zip(b.0)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut points: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for (p, w) in atoms {
        let same = !groups.is_empty() && points[points.len() - dim..] == *p;
        if same {
            groups.last_mut().unwrap().push(w);
        } else {
            points.extend_from_slice(p);
            groups.push(vec![w]);
        }
    }
    let masses = groups.into_iter().map(|g| exec::ksum(g)).collect();
    (points, masses)
}

fn pair_costs(dim: usize, points: &[f64]) -> Vec<f64> {
    let k = points.len() / dim;
    let rows = exec::map_indices(k, |a| {
        let pa = &points[a * dim..(a + 1) * dim];
        (0..k)
            .map(|b| crate::dynamics::dist2(pa, &points[b * dim..(b + 1) * dim]).sqrt())
            .collect::<Vec<f64>>()
    });
    rows.concat()
}

/// Simplex in the shifted variables `y = phi + 1 in [0, 2]`.
fn solve_dense(dim: usize, points: &[f64], s: &[f64]) -> Result<Vec<f64>, MeasureError> {
    let k = s.len();
    let cost = pair_costs(dim, points);
    let rows = k + k * (k - 1);
    let mut a = vec![0.0; rows * k];
    let mut b = Vec::with_capacity(rows);
    for i in 0..k {
        a[i * k + i] = 1.0;
        b.push(2.0);
    }
    let mut r = k;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                a[r * k + i] = 1.0;
                a[r * k + j] = -1.0;
                b.push(cost[i * k + j]);
                r += 1;
            }
        }
    }
    let sol = lp::maximize(s, &a, &b)?;
    Ok(sol.x.iter().map(|y| y - 1.0).collect())
}

/// Successive shortest paths on the transshipment dual. Nodes are the
/// support points plus a ground node `g` with `phi_g = 0`; arcs `k -> l`
/// cost `|p_k - p_l|` and arcs to and from `g` cost 1. Node `k` supplies
/// `s_k` and the ground absorbs the mass imbalance. Returns the optimal
/// cost and potentials `phi_k = h_g - h_k`.
pub(crate) fn solve_flow(
    dim: usize,
    points: &[f64],
    s: &[f64],
) -> Result<(f64, Vec<f64>), MeasureError> {
    let k = s.len();
    let nodes = k + 1;
    let g = k;
    let pc = pair_costs(dim, points);
    let cost = |a: usize, b: usize| -> f64 {
        if a == g || b == g {
            if a == b {
                0.0
            } else {
                1.0
            }
        } else {
            pc[a * k + b]
        }
    };
    let mut excess: Vec<f64> = s.to_vec();
    excess.push(-exec::ksum(s.iter().copied()));
    let total: f64 = excess.iter().filter(|e| **e > 0.0).sum();
    let tiny = 1e-15 * total.max(1e-300);
    let mut flow = vec![0.0; nodes * nodes];
    let mut h = vec![0.0; nodes];
    let mut dist = vec![0.0; nodes];
    let mut prev = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];

    let max_iter = 20 * nodes + 100;
    let mut iter = 0;
    loop {
        if !excess.iter().any(|e| *e > tiny) || !excess.iter().any(|e| *e < -tiny) {
            break;
        }
        iter += 1;
        if iter > max_iter {
            return Err(MeasureError::Lp("flow solver did not converge".into()));
        }
        // Dense Dijkstra from all excess nodes at once, on reduced costs.
        for v in 0..nodes {
            dist[v] = if excess[v] > tiny { 0.0 } else { f64::INFINITY };
            prev[v] = usize::MAX;
            done[v] = false;
        }
        let mut target = usize::MAX;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if excess[u] < -tiny {
                target = u;
                break;
            }
            for v in 0..nodes {
                if done[v] || v == u {
                    continue;
                }
                let c = if flow[v * nodes + u] > 0.0 {
                    -cost(v, u)
                } else {
                    cost(u, v)
                };
                let rc = (c + h[u] - h[v]).max(0.0);
                let nd = dist[u] + rc;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                }
            }
        }
        if target == usize::MAX {
            return Err(MeasureError::Lp("no augmenting path".into()));
        }
        let dt = dist[target];
        for v in 0..nodes {
            h[v] += dist[v].min(dt);
        }
        // Bottleneck along the path.
        let mut amount = -excess[target];
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if flow[v * nodes + u] > 0.0 {
                amount = amount.min(flow[v * nodes + u]);
            }
            v = u;
        }
        amount = amount.min(excess[v]);
        let source = v;
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if flow[v * nodes + u] > 0.0 {
                flow[v * nodes + u] -= amount;
                if flow[v * nodes + u] <= tiny {
                    flow[v * nodes + u] = 0.0;
                }
            } else {
                flow[u * nodes + v] += amount;
            }
            v = u;
        }
        excess[source] -= amount;
        excess[target] += amount;
    }

    let mut value = exec::KahanSum::new();
    for a in 0..nodes {
        for b in 0..nodes {
            let f = flow[a * nodes + b];
            if f > 0.0 {
                value.add(f * cost(a, b));
            }
        }
    }
    let potentials = (0..k).map(|a| (h[g] - h[a]).clamp(-1.0, 1.0)).collect();
    Ok((value.value(), potentials))
}

#[cfg(test)]
mod tests {
    use super::super::Space;
    use super::*;

    fn plain(points: Vec<f64>, weights: Vec<f64>) -> EmpiricalMeasure {
        EmpiricalMeasure::new_finite(1, Space::Plain, points, weights).unwrap()
    }

    #[test]
    fn diracs() {
        for method in [DblMethod::Dense, DblMethod::Flow] {
            let o = DblOptions {
                method,
                ..Default::default()
            };
            for (a, b, want) in [(0.0, 0.5, 0.5), (0.0, 3.0, 2.0), (1.0, 1.0, 0.0)] {
                let s = dbl_with(&plain(vec![a], vec![1.0]), &plain(vec![b], vec![1.0]), &o).unwrap();
                assert!((s.value - want).abs() < 1e-12, "{method:?} {a} {b} {}", s.value);
                assert!(s.max_violation() < 1e-12);
            }
        }
    }

    #[test]
    fn half_mass_moved() {
        let mu = plain(vec![0.0, 1.0], vec![0.5, 0.5]);
        let nu = plain(vec![0.0], vec![1.0]);
        assert!((dbl(&mu, &nu).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unequal_mass_uses_the_bound() {
        let mu = plain(vec![0.0], vec![1.0]);
        let nu = plain(vec![0.0], vec![0.25]);
        for method in [DblMethod::Dense, DblMethod::Flow] {
            let o = DblOptions {
                method,
                ..Default::default()
            };
            assert!((dbl_with(&mu, &nu, &o).unwrap().value - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let mu = plain(vec![0.0, 1.0, 2.0], vec![0.2; 3]);
        let nu = plain(vec![0.5], vec![0.6]);
        let o = DblOptions {
            support_cap: 3,
            ..Default::default()
        };
        assert!(matches!(
            dbl_with(&mu, &nu, &o),
            Err(MeasureError::SupportTooLarge { size: 4, cap: 3 })
        ));
    }

    #[test]
    fn shared_points_cancel() {
        let mu = plain(vec![0.0, 1.0], vec![0.5, 0.5]);
        let s = dbl_with(&mu, &mu, &DblOptions::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.value, 0.0);
    }
}
