use serde::{Deserialize, Serialize};

use super::{DynamicsError, MAX_DIM};

/// Positions and velocities of `N` equally weighted particles at time `t`.
///
/// Coordinates are stored flat and row-major: particle `i` occupies
/// `positions[i*dim .. (i+1)*dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub t: f64,
    pub dim: usize,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl ParticleState {
    pub fn new(
        t: f64,
        dim: usize,
        positions: Vec<f64>,
        velocities: Vec<f64>,
    ) -> Result<Self, DynamicsError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(DynamicsError::InvalidState(format!("unsupported dim {dim}")));
        }
        if positions.len() != velocities.len() || positions.len() % dim != 0 || positions.is_empty() {
            return Err(DynamicsError::InvalidState(format!(
                "{} position and {} velocity coordinates do not describe particles in dimension {dim}",
                positions.len(),
                velocities.len()
            )));
        }
        if positions.iter().chain(&velocities).any(|c| !c.is_finite()) {
            return Err(DynamicsError::InvalidState("non-finite coordinate".into()));
        }
        Ok(Self {
            t,
            dim,
            positions,
            velocities,
        })
    }

    /// Build from per-particle vectors.
    pub fn from_vectors(t: f64, xs: &[Vec<f64>], vs: &[Vec<f64>]) -> Result<Self, DynamicsError> {
        let dim = xs.first().map_or(0, Vec::len);
        if xs.iter().chain(vs).any(|p| p.len() != dim) || xs.len() != vs.len() {
            return Err(DynamicsError::InvalidState("ragged particle vectors".into()));
        }
        Self::new(t, dim, xs.concat(), vs.concat())
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn v(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn max_speed(&self) -> f64 {
        (0..self.len()).map(|i| norm(self.v(i))).fold(0.0, f64::max)
    }

    pub fn max_position(&self) -> f64 {
        (0..self.len()).map(|i| norm(self.x(i))).fold(0.0, f64::max)
    }

    /// Componentwise sum of velocities (N times the mean momentum).
    pub fn momentum_sum(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|k| crate::exec::ksum((0..self.len()).map(|i| self.velocities[i * self.dim + k])))
            .collect()
    }

    /// Pack as the integrator state vector `[x..., v...]`.
    pub(crate) fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.positions.len());
        y.extend_from_slice(&self.positions);
        y.extend_from_slice(&self.velocities);
        y
    }

    pub(crate) fn unpack(t: f64, dim: usize, n: usize, y: &[f64]) -> Self {
        let half = n * dim;
        Self {
            t,
            dim,
            positions: y[..half].to_vec(),
            velocities: y[half..2 * half].to_vec(),
        }
    }
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_input() {
        assert!(ParticleState::new(0.0, 2, vec![0.0; 3], vec![0.0; 3]).is_err());
        assert!(ParticleState::new(0.0, 1, vec![0.0; 2], vec![0.0; 3]).is_err());
        assert!(ParticleState::new(0.0, 1, vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn pack_roundtrip() {
        let s = ParticleState::new(0.5, 2, vec![1., 2., 3., 4.], vec![5., 6., 7., 8.]).unwrap();
        let y = s.pack();
        assert_eq!(ParticleState::unpack(0.5, 2, 2, &y), s);
        assert_eq!(s.momentum_sum(), vec![12.0, 14.0]);
    }
}
