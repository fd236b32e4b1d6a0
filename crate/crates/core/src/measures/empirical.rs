use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::MeasureError;
use crate::dynamics::ParticleState;
use crate::Error;

/// Whether a measure lives in phase space `R^{2d}` (points are `(x, v)`)
/// or in a plain space `R^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Phase,
    Plain,
}

/// Finite nonnegative atomic measure `sum_a w_a delta_{p_a}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub dim: usize,
    pub space: Space,
    /// Flat, row-major atom coordinates.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// All atoms lie in the closed ball of this radius.
    pub support_radius: f64,
}

const MASS_SLACK: f64 = 1e-12;

impl EmpiricalMeasure {
    /// Sub-probability measure: nonnegative weights, total mass at most 1.
    pub fn new(dim: usize, space: Space, points: Vec<f64>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        let m = Self::new_finite(dim, space, points, weights)?;
        if m.total_mass() > 1.0 + MASS_SLACK {
            return Err(MeasureError::Invalid(format!(
                "total mass {} exceeds 1",
                m.total_mass()
            )));
        }
        Ok(m)
    }

    /// Any finite nonnegative atomic measure.
    pub fn new_finite(
        dim: usize,
        space: Space,
        points: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if dim == 0 || points.len() != weights.len() * dim {
            return Err(MeasureError::Invalid(format!(
                "{} coordinates for {} atoms in dimension {dim}",
                points.len(),
                weights.len()
            )));
        }
        if space == Space::Phase && dim % 2 != 0 {
            return Err(MeasureError::Invalid("phase space needs even dimension".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(MeasureError::Invalid("weights must be finite and nonnegative".into()));
        }
        if points.iter().any(|c| !c.is_finite()) {
            return Err(MeasureError::Invalid("non-finite coordinate".into()));
        }
        let support_radius = points
            .chunks(dim)
            .map(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Ok(Self {
            dim,
            space,
            points,
            weights,
            support_radius,
        })
    }

    /// Zero measure in dimension `dim`.
    pub fn zero(dim: usize, space: Space) -> Self {
        Self {
            dim,
            space,
            points: Vec::new(),
            weights: Vec::new(),
            support_radius: 0.0,
        }
    }

    /// Declare a larger support bound. Fails if an atom lies outside.
    pub fn with_support_radius(mut self, radius: f64) -> Result<Self, MeasureError> {
        if self.support_radius > radius * (1.0 + 1e-12) {
            return Err(MeasureError::Invalid(format!(
                "atom at radius {} outside declared support {radius}",
                self.support_radius
            )));
        }
        self.support_radius = radius;
        Ok(self)
    }

    /// Empirical measure `(1/N) sum_i delta_{(x_i, v_i)}` on phase space.
    pub fn from_particles(state: &ParticleState) -> Self {
        let n = state.len();
        let d = state.dim;
        let mut points = Vec::with_capacity(2 * d * n);
        for i in 0..n {
            points.extend_from_slice(state.x(i));
            points.extend_from_slice(state.v(i));
        }
        Self::new(2 * d, Space::Phase, points, vec![1.0 / n as f64; n])
            .expect("particle states are finite")
    }

    /// Nonnegative representative `(1/N) sum_i (v_i[k] + M) delta_{x_i}` of
    /// the `k`th momentum component, shifted by the speed bound `M`.
    pub fn shifted_momentum_component(
        state: &ParticleState,
        k: usize,
        speed_bound: f64,
    ) -> Result<Self, MeasureError> {
        let n = state.len();
        let weights: Vec<f64> = (0..n)
            .map(|i| (state.v(i)[k] + speed_bound) / n as f64)
            .collect();
        if weights.iter().any(|w| *w < 0.0) {
            return Err(MeasureError::Invalid(format!(
                "velocity component below -{speed_bound}"
            )));
        }
        Self::new_finite(state.dim, Space::Plain, state.positions.clone(), weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn point(&self, a: usize) -> &[f64] {
        &self.points[a * self.dim..(a + 1) * self.dim]
    }

    pub fn total_mass(&self) -> f64 {
        crate::exec::ksum(self.weights.iter().copied())
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_SLACK
    }

    /// Spatial dimension `d` of a phase-space measure.
    pub fn phase_dim(&self) -> Result<usize, MeasureError> {
        match self.space {
            Space::Phase => Ok(self.dim / 2),
            Space::Plain => Err(MeasureError::NotPhaseSpace),
        }
    }

    /// Position part of atom `a` (phase space).
    #[inline]
    pub fn x(&self, a: usize) -> &[f64] {
        let d = self.dim / 2;
        &self.points[a * self.dim..a * self.dim + d]
    }

    /// Velocity part of atom `a` (phase space).
    #[inline]
    pub fn v(&self, a: usize) -> &[f64] {
        let d = self.dim / 2;
        &self.points[a * self.dim + d..(a + 1) * self.dim]
    }

    /// Integral of `g` against the measure.
    pub fn integrate(&self, g: impl Fn(&[f64]) -> f64) -> f64 {
        crate::exec::ksum((0..self.len()).map(|a| self.weights[a] * g(self.point(a))))
    }

    /// Projection of a phase-space measure onto positions. Co-located
    /// projections are kept as separate atoms.
    pub fn marginal_x(&self) -> Result<Self, MeasureError> {
        let d = self.phase_dim()?;
        let mut points = Vec::with_capacity(self.len() * d);
        for a in 0..self.len() {
            points.extend_from_slice(self.x(a));
        }
        Self::new_finite(d, Space::Plain, points, self.weights.clone())
    }

    /// `weight,p1..pk` with one atom per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("weight");
        for k in 1..=self.dim {
            header.push_str(&format!(",p{k}"));
        }
        writeln!(w, "{header}")?;
        for a in 0..self.len() {
            write!(w, "{}", self.weights[a])?;
            for c in self.point(a) {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Parse the `weight,p1..pk` format. The result is a plain-space finite
    /// measure.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, Error> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty measure file".into()))??;
        let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "weight" {
            return Err(Error::Parse(format!("unexpected measure header `{header}`")));
        }
        for (k, c) in cols[1..].iter().enumerate() {
            if *c != format!("p{}", k + 1) {
                return Err(Error::Parse(format!("unexpected column `{c}`")));
            }
        }
        let dim = cols.len() - 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if vals.len() != dim + 1 {
                return Err(Error::Parse(format!("line {}: wrong column count", lineno + 2)));
            }
            weights.push(vals[0]);
            points.extend_from_slice(&vals[1..]);
        }
        Ok(Self::new_finite(dim, Space::Plain, points, weights)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn particles_become_uniform_atoms() {
        let s = ParticleState::new(0.0, 1, vec![0.0, 1.0, 2.0], vec![1.0, 0.0, -1.0]).unwrap();
        let mu = EmpiricalMeasure::from_particles(&s);
        assert_eq!(mu.len(), 3);
        assert!(mu.weights.iter().all(|w| *w == 1.0 / 3.0));
        assert!(mu.is_probability());
        assert_eq!(mu.x(1), &[1.0]);
        assert_eq!(mu.v(2), &[-1.0]);

        let one = ParticleState::new(0.0, 2, vec![0.5, 0.5], vec![3.0, 4.0]).unwrap();
        let mu = EmpiricalMeasure::from_particles(&one);
        assert_eq!(mu.weights, vec![1.0]);
        assert_eq!(mu.points, vec![0.5, 0.5, 3.0, 4.0]);
    }

    #[test]
    fn marginal_keeps_colocated_atoms() {
        let mu = EmpiricalMeasure::new(2, Space::Phase, vec![0.0, 1.0, 0.0, -1.0], vec![0.5, 0.5]).unwrap();
        let rho = mu.marginal_x().unwrap();
        assert_eq!(rho.len(), 2);
        assert_eq!(rho.points, vec![0.0, 0.0]);
        assert_eq!(rho.total_mass(), 1.0);
    }

    #[test]
    fn validation() {
        assert!(EmpiricalMeasure::new(1, Space::Plain, vec![0.0], vec![-0.1]).is_err());
        assert!(EmpiricalMeasure::new(1, Space::Plain, vec![0.0, 1.0], vec![0.6, 0.6]).is_err());
        assert!(EmpiricalMeasure::new_finite(1, Space::Plain, vec![0.0, 1.0], vec![0.6, 0.6]).is_ok());
        assert!(EmpiricalMeasure::new(3, Space::Phase, vec![0.0; 3], vec![1.0]).is_err());
        let m = EmpiricalMeasure::new(1, Space::Plain, vec![2.0], vec![1.0]).unwrap();
        assert!(m.clone().with_support_radius(1.0).is_err());
        assert_eq!(m.with_support_radius(3.0).unwrap().support_radius, 3.0);
    }

    #[test]
    fn csv_roundtrip() {
        let m = EmpiricalMeasure::new(2, Space::Plain, vec![0.1, 0.2, -1.0 / 3.0, 4.0], vec![0.25, 0.75]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("weight,p1,p2\n"));
        let back = EmpiricalMeasure::read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn shifted_momentum_is_nonnegative() {
        let s = ParticleState::new(0.0, 1, vec![0.0, 1.0], vec![-0.5, 0.5]).unwrap();
        let m = EmpiricalMeasure::shifted_momentum_component(&s, 0, 1.0).unwrap();
        assert_eq!(m.weights, vec![0.25, 0.75]);
        assert!(EmpiricalMeasure::shifted_momentum_component(&s, 0, 0.1).is_err());
    }
}
