use serde::{Deserialize, Serialize};

use super::{EmpiricalMeasure, MeasureError, Space};

/// Atoms sharing one position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub position: Vec<f64>,
    /// Spatial mass at this position.
    pub mass: f64,
    /// Conditional velocity atoms, flat row-major.
    pub velocities: Vec<f64>,
    /// Conditional weights, summing to 1.
    pub weights: Vec<f64>,
    /// Conditional mean velocity.
    pub mean: Vec<f64>,
    /// Indices of the source atoms in this group.
    pub members: Vec<usize>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn velocity(&self, k: usize) -> &[f64] {
        let d = self.position.len();
        &self.velocities[k * d..(k + 1) * d]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disintegration {
    pub dim: usize,
    pub groups: Vec<Group>,
}

impl Disintegration {
    pub fn total_mass(&self) -> f64 {
        crate::exec::ksum(self.groups.iter().map(|g| g.mass))
    }

    /// Rebuild the phase-space measure `sum_x rho(x) delta_x (x) sigma_x`.
    pub fn reexpand(&self) -> EmpiricalMeasure {
        let d = self.dim;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for g in &self.groups {
            for k in 0..g.len() {
                points.extend_from_slice(&g.position);
                points.extend_from_slice(g.velocity(k));
                weights.push(g.mass * g.weights[k]);
            }
        }
        EmpiricalMeasure::new_finite(2 * d, Space::Phase, points, weights)
            .expect("groups hold finite data")
    }

    /// Group index of each of the `n_atoms` source atoms. Zero-mass atoms
    /// map to `None`.
    pub fn group_index(&self, n_atoms: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_atoms];
        for (gi, g) in self.groups.iter().enumerate() {
            for &a in &g.members {
                out[a] = Some(gi);
            }
        }
        out
    }
}

/// Group the atoms of a phase-space measure by position.
///
/// With `tolerance == 0` positions are grouped by exact equality. With a
/// positive tolerance atoms are linked when closer than `tolerance`, and the
/// resulting clusters must have diameter at most `tolerance`, otherwise the
/// grouping depends on the chaining and `AmbiguousGrouping` is returned.
/// Zero-mass atoms are dropped.
pub fn disintegrate(mu: &EmpiricalMeasure, tolerance: f64) -> Result<Disintegration, MeasureError> {
    let d = mu.phase_dim()?;
    if !(tolerance >= 0.0) {
        return Err(MeasureError::Invalid(format!("negative grouping tolerance {tolerance}")));
    }
    let live: Vec<usize> = (0..mu.len()).filter(|&a| mu.weights[a] > 0.0).collect();
    let clusters = if tolerance == 0.0 {
        exact_clusters(mu, &live)
    } else {
        linkage_clusters(mu, &live, tolerance)?
    };

    let groups = clusters
        .into_iter()
        .map(|members| {
            let mass = crate::exec::ksum(members.iter().map(|&a| mu.weights[a]));
            let position = if tolerance == 0.0 {
                mu.x(members[0]).to_vec()
            } else {
                (0..d)
                    .map(|k| {
                        crate::exec::ksum(members.iter().map(|&a| mu.weights[a] * mu.x(a)[k])) / mass
                    })
                    .collect()
            };
            let weights: Vec<f64> = members.iter().map(|&a| mu.weights[a] / mass).collect();
            let mut velocities = Vec::with_capacity(members.len() * d);
            for &a in &members {
                velocities.extend_from_slice(mu.v(a));
            }
            let mean = (0..d)
                .map(|k| {
                    crate::exec::ksum(members.iter().map(|&a| mu.weights[a] * mu.v(a)[k])) / mass
                })
                .collect();
            Group {
                position,
                mass,
                velocities,
                weights,
                mean,
                members,
            }
        })
        .collect();
    Ok(Disintegration { dim: d, groups })
}

fn exact_clusters(mu: &EmpiricalMeasure, live: &[usize]) -> Vec<Vec<usize>> {
    let mut order = live.to_vec();
    order.sort_by(|&a, &b| {
        mu.x(a)
            .iter()
            .zip(mu.x(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut out: Vec<Vec<usize>> = Vec::new();
    for a in order {
        match out.last_mut() {
            Some(g) if same_bits(mu.x(g[0]), mu.x(a)) => g.push(a),
            _ => out.push(vec![a]),
        }
    }
    out.sort_by_key(|g| g[0]);
    out
}

fn same_bits(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0))
}

fn linkage_clusters(
    mu: &EmpiricalMeasure,
    live: &[usize],
    tol: f64,
) -> Result<Vec<Vec<usize>>, MeasureError> {
    let n = live.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let dist = |a: usize, b: usize| crate::dynamics::dist2(mu.x(a), mu.x(b)).sqrt();
    for i in 0..n {
        for j in i + 1..n {
            if dist(live[i], live[j]) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        buckets[r].push(live[i]);
    }
    let clusters: Vec<Vec<usize>> = buckets.into_iter().filter(|b| !b.is_empty()).collect();
    for c in &clusters {
        let mut diameter: f64 = 0.0;
        for (k, &a) in c.iter().enumerate() {
            for &b in &c[k + 1..] {
                diameter = diameter.max(dist(a, b));
            }
        }
        if diameter > tol {
            return Err(MeasureError::AmbiguousGrouping {
                tolerance: tol,
                diameter,
            });
        }
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phase(points: Vec<f64>, weights: Vec<f64>) -> EmpiricalMeasure {
        EmpiricalMeasure::new(2, Space::Phase, points, weights).unwrap()
    }

    #[test]
    fn distinct_positions_give_diracs() {
        let mu = phase(vec![0.0, 1.0, 1.0, -2.0, 2.0, 0.5], vec![0.2, 0.3, 0.5]);
        let dis = disintegrate(&mu, 0.0).unwrap();
        assert_eq!(dis.groups.len(), 3);
        for (a, g) in dis.groups.iter().enumerate() {
            assert_eq!(g.weights, vec![1.0]);
            assert_eq!(g.mean, mu.v(a));
            assert_eq!(g.mass, mu.weights[a]);
        }
    }

    #[test]
    fn colocated_pair() {
        let mu = phase(vec![0.0, 1.0, 0.0, -1.0], vec![0.5, 0.5]);
        let dis = disintegrate(&mu, 0.0).unwrap();
        assert_eq!(dis.groups.len(), 1);
        let g = &dis.groups[0];
        assert_eq!(g.mass, 1.0);
        assert_eq!(g.weights, vec![0.5, 0.5]);
        assert_eq!(g.mean, vec![0.0]);
    }

    #[test]
    fn signed_zero_groups_with_zero() {
        let mu = phase(vec![0.0, 1.0, -0.0, 3.0], vec![0.5, 0.5]);
        assert_eq!(disintegrate(&mu, 0.0).unwrap().groups.len(), 1);
    }

    #[test]
    fn chained_clusters_are_ambiguous() {
        let mu = phase(vec![0.0, 0.0, 0.9, 0.0, 1.8, 0.0], vec![0.3, 0.3, 0.4]);
        assert!(matches!(
            disintegrate(&mu, 1.0),
            Err(MeasureError::AmbiguousGrouping { .. })
        ));
        let dis = disintegrate(&mu, 0.5).unwrap();
        assert_eq!(dis.groups.len(), 3);
    }

    #[test]
    fn tolerance_grouping_uses_centroid() {
        let mu = phase(vec![0.0, 1.0, 0.1, 3.0, 5.0, 0.0], vec![0.25, 0.25, 0.5]);
        let dis = disintegrate(&mu, 0.2).unwrap();
        assert_eq!(dis.groups.len(), 2);
        assert!((dis.groups[0].position[0] - 0.05).abs() < 1e-15);
        assert_eq!(dis.groups[0].mean, vec![2.0]);
    }

    #[test]
    fn zero_weight_atoms_are_dropped() {
        let mu = phase(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0]);
        assert_eq!(disintegrate(&mu, 0.0).unwrap().groups.len(), 1);
    }
}
