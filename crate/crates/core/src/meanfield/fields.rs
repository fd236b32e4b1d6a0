use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{dist2, ParticleState};
use crate::exec::KahanSum;
use crate::measures::{EmpiricalMeasure, MeasureError};

/// Which point represents a cell in spatial quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CellNode {
    /// Geometric center `(k + 1/2) h`.
    Center,
    /// Mass-weighted mean position of the atoms in the cell.
    #[default]
    Centroid,
}

/// One nonempty cell `prod_j [k_j h, (k_j + 1) h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: Vec<i64>,
    /// Quadrature node, per the field's `node` choice.
    pub point: Vec<f64>,
    pub mass: f64,
    /// Mass-weighted mean velocity.
    pub mean: Vec<f64>,
    /// `sum w |v - mean|^2 / mass`.
    pub cov_trace: f64,
}

/// Binned density, mean velocity and velocity spread on a grid of width
/// `h` anchored at the origin. Empty cells are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalField {
    pub t: f64,
    pub dim: usize,
    pub h: f64,
    pub node: CellNode,
    pub cells: Vec<Cell>,
}

impl LocalField {
    pub fn total_mass(&self) -> f64 {
        crate::exec::ksum(self.cells.iter().map(|c| c.mass))
    }

    pub fn max_cell_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).fold(0.0, f64::max)
    }

    /// The same data on the grid of width `2h`: cells `k` with equal
    /// `floor(k / 2)` are merged.
    pub fn coarsen(&self) -> LocalField {
        let d = self.dim;
        let h2 = 2.0 * self.h;
        let mut map: BTreeMap<Vec<i64>, Vec<&Cell>> = BTreeMap::new();
        for c in &self.cells {
            map.entry(c.index.iter().map(|k| k.div_euclid(2)).collect()).or_default().push(c);
        }
        let cells = map
            .into_iter()
            .map(|(index, group)| {
                let mass = crate::exec::ksum(group.iter().map(|c| c.mass));
                let wavg = |f: &dyn Fn(&Cell) -> f64| crate::exec::ksum(group.iter().map(|c| c.mass * f(c))) / mass;
                let mean: Vec<f64> = (0..d).map(|k| wavg(&|c| c.mean[k])).collect();
                let point = match self.node {
                    CellNode::Center => index.iter().map(|k| (*k as f64 + 0.5) * h2).collect(),
                    CellNode::Centroid => (0..d).map(|k| wavg(&|c| c.point[k])).collect(),
                };
                let cov_trace = wavg(&|c| c.cov_trace + dist2(&c.mean, &mean));
                Cell {
                    index,
                    point,
                    mass,
                    mean,
                    cov_trace,
                }
            })
            .collect();
        LocalField {
            t: self.t,
            dim: d,
            h: h2,
            node: self.node,
            cells,
        }
    }

    /// Fields of a particle snapshot, stamped with its time.
    pub fn from_state(state: &ParticleState, h: f64, node: CellNode) -> Result<Self, MeasureError> {
        let mu = EmpiricalMeasure::from_particles(state);
        let mut f = bin(&mu, h, node)?;
        f.t = state.t;
        Ok(f)
    }
}

#[derive(Default)]
struct Acc {
    mass: KahanSum,
    x: Vec<KahanSum>,
    v: Vec<KahanSum>,
    members: Vec<usize>,
}

/// Bin a phase-space measure into cells of width `h`.
pub fn local_fields(mu: &EmpiricalMeasure, h: f64) -> Result<LocalField, MeasureError> {
    bin(mu, h, CellNode::default())
}

fn bin(mu: &EmpiricalMeasure, h: f64, node: CellNode) -> Result<LocalField, MeasureError> {
    let d = mu.phase_dim()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(MeasureError::Invalid(format!("cell width must be > 0, got {h}")));
    }
    let mut map: BTreeMap<Vec<i64>, Acc> = BTreeMap::new();
    for a in 0..mu.len() {
        let w = mu.weights[a];
        if w == 0.0 {
            continue;
        }
        let key: Vec<i64> = mu.x(a).iter().map(|c| (c / h).floor() as i64).collect();
        let acc = map.entry(key).or_insert_with(|| Acc {
            x: vec![KahanSum::new(); d],
            v: vec![KahanSum::new(); d],
            ..Default::default()
        });
        acc.mass.add(w);
        for k in 0..d {
            acc.x[k].add(w * mu.x(a)[k]);
            acc.v[k].add(w * mu.v(a)[k]);
        }
        acc.members.push(a);
    }
    let cells = map
        .into_iter()
        .map(|(index, acc)| {
            let mass = acc.mass.value();
            let mean: Vec<f64> = acc.v.iter().map(|s| s.value() / mass).collect();
            let point = match node {
                CellNode::Center => index.iter().map(|k| (*k as f64 + 0.5) * h).collect(),
                CellNode::Centroid => acc.x.iter().map(|s| s.value() / mass).collect(),
            };
            let spread: f64 = crate::exec::ksum(
                acc.members
                    .iter()
                    .map(|&a| mu.weights[a] * dist2(mu.v(a), &mean)),
            );
            Cell {
                index,
                point,
                mass,
                mean,
                cov_trace: spread / mass,
            }
        })
        .collect();
    Ok(LocalField {
        t: 0.0,
        dim: d,
        h,
        node,
        cells,
    })
}

/// `sum_c mass_c * cov_trace_c`: mass-weighted local velocity variance.
pub fn mk_index(field: &LocalField) -> f64 {
    crate::exec::ksum(field.cells.iter().map(|c| c.mass * c.cov_trace))
}

/// [`mk_index`] of the fields of `mu` at width `h`.
pub fn mk_index_at(mu: &EmpiricalMeasure, h: f64) -> Result<f64, MeasureError> {
    Ok(mk_index(&local_fields(mu, h)?))
}
