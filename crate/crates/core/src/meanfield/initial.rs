use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, ParticleState};
use crate::rng::Stream;

use super::MeanfieldError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    /// Uniform on `[-half_width, half_width]^d`.
    UniformBox { half_width: f64 },
    /// Centered Gaussian conditioned on `|x| <= radius`.
    TruncatedGaussian { sigma: f64, radius: f64 },
    /// Equal-weight mixture of uniform balls of radius `radius` centered
    /// at `+-separation/2` along the first axis.
    TwoBump { separation: f64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityField {
    Constant { value: Vec<f64> },
    /// `u_1 = rate * x_d`, other components 0 (in one dimension `u = rate x`).
    LinearShear { rate: f64 },
    /// `u_1 = amplitude * sin(wavenumber * x_1)`, other components 0.
    Sinusoid { amplitude: f64, wavenumber: f64 },
    /// Each particle gets `v1` or `v2` by a fair coin.
    TwoSpeed { v1: Vec<f64>, v2: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub density: Density,
    pub velocity: VelocityField,
    pub seed: u64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl Density {
    /// Radius of a centered ball containing the support.
    pub fn support_radius(&self, dim: usize) -> f64 {
        match self {
            Density::UniformBox { half_width } => half_width * (dim as f64).sqrt(),
            Density::TruncatedGaussian { radius, .. } => *radius,
            Density::TwoBump { separation, radius } => 0.5 * separation + radius,
        }
    }

    /// Diameter of the support.
    pub fn support_diameter(&self, dim: usize) -> f64 {
        2.0 * self.support_radius(dim)
    }

    fn validate(&self) -> Result<(), MeanfieldError> {
        let ok = match self {
            Density::UniformBox { half_width } => *half_width > 0.0,
            Density::TruncatedGaussian { sigma, radius } => *sigma > 0.0 && *radius > 0.0,
            Density::TwoBump { separation, radius } => *separation >= 0.0 && *radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(MeanfieldError::InvalidSpec(format!("bad density parameters {self:?}")))
        }
    }

    fn sample(&self, dim: usize, rng: &mut Stream) -> Vec<f64> {
        match self {
            Density::UniformBox { half_width } => {
                (0..dim).map(|_| rng.range(-half_width, *half_width)).collect()
            }
            Density::TruncatedGaussian { sigma, radius } => loop {
                let p: Vec<f64> = (0..dim).map(|_| sigma * rng.normal()).collect();
                if norm(&p) <= *radius {
                    return p;
                }
            },
            Density::TwoBump { separation, radius } => {
                let sign = if rng.coin() { 1.0 } else { -1.0 };
                let mut p = loop {
                    let p: Vec<f64> = (0..dim).map(|_| rng.range(-radius, *radius)).collect();
                    if norm(&p) <= *radius {
                        break p;
                    }
                };
                p[0] += sign * 0.5 * separation;
                p
            }
        }
    }
}

impl VelocityField {
    /// Upper bound of `|u|` on a ball of radius `r`.
    pub fn sup_bound(&self, r: f64) -> f64 {
        match self {
            VelocityField::Constant { value } => norm(value),
            VelocityField::LinearShear { rate } => rate.abs() * r,
            VelocityField::Sinusoid { amplitude, .. } => amplitude.abs(),
            VelocityField::TwoSpeed { v1, v2 } => norm(v1).max(norm(v2)),
        }
    }

    fn validate(&self, dim: usize) -> Result<(), MeanfieldError> {
        let bad = match self {
            VelocityField::Constant { value } => value.len() != dim,
            VelocityField::TwoSpeed { v1, v2 } => v1.len() != dim || v2.len() != dim,
            VelocityField::LinearShear { rate } => !rate.is_finite(),
            VelocityField::Sinusoid { amplitude, wavenumber } => {
                !amplitude.is_finite() || !wavenumber.is_finite()
            }
        };
        if bad {
            Err(MeanfieldError::InvalidSpec(format!(
                "velocity field {self:?} does not fit dimension {dim}"
            )))
        } else {
            Ok(())
        }
    }

    /// `u_0(x)`; the two-speed split consumes one coin from `rng`.
    fn eval(&self, x: &[f64], rng: &mut Stream) -> Vec<f64> {
        let d = x.len();
        match self {
            VelocityField::Constant { value } => value.clone(),
            VelocityField::LinearShear { rate } => {
                let mut u = vec![0.0; d];
                u[0] = rate * x[d - 1];
                u
            }
            VelocityField::Sinusoid { amplitude, wavenumber } => {
                let mut u = vec![0.0; d];
                u[0] = amplitude * (wavenumber * x[0]).sin();
                u
            }
            VelocityField::TwoSpeed { v1, v2 } => {
                if rng.coin() {
                    v1.clone()
                } else {
                    v2.clone()
                }
            }
        }
    }
}

impl InitialSpec {
    /// Checks support radius and velocity bound against `M`.
    pub fn validate(&self, params: &ModelParams) -> Result<(), MeanfieldError> {
        self.density.validate()?;
        self.velocity.validate(params.dim)?;
        let m = params.speed_bound;
        let r = self.density.support_radius(params.dim);
        if r > m {
            return Err(MeanfieldError::InvalidSpec(format!(
                "support radius {r} exceeds the speed bound {m}"
            )));
        }
        let u = self.velocity.sup_bound(r);
        if u > m {
            return Err(MeanfieldError::InvalidSpec(format!(
                "velocity bound {u} exceeds the speed bound {m}"
            )));
        }
        Ok(())
    }
}

/// Draw `n` particles. Particle `i` uses its own stream `i`, so the first
/// `n` particles of a larger sample coincide with a sample of size `n`.
/// Exact duplicate positions are redrawn from the same stream.
pub fn sample_initial(
    spec: &InitialSpec,
    params: &ModelParams,
    n: usize,
) -> Result<ParticleState, MeanfieldError> {
    spec.validate(params)?;
    if n == 0 {
        return Err(MeanfieldError::InvalidInput("need at least one particle".into()));
    }
    let d = params.dim;
    let limit = 1000 * n;
    let mut redraws = 0;
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(n);
    let mut positions = Vec::with_capacity(n * d);
    let mut velocities = Vec::with_capacity(n * d);
    for i in 0..n {
        let mut rng = Stream::new(spec.seed, i as u64);
        let x = loop {
            let x = spec.density.sample(d, &mut rng);
            // -0.0 and 0.0 are the same position.
            let key: Vec<u64> = x.iter().map(|c| (c + 0.0).to_bits()).collect();
            if seen.insert(key) {
                break x;
            }
            redraws += 1;
            if redraws > limit {
                return Err(MeanfieldError::RejectionOverflow { redraws, limit });
            }
        };
        let v = spec.velocity.eval(&x, &mut rng);
        positions.extend_from_slice(&x);
        velocities.extend_from_slice(&v);
    }
    Ok(ParticleState::new(0.0, d, positions, velocities)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(velocity: VelocityField) -> InitialSpec {
        InitialSpec {
            density: Density::UniformBox { half_width: 0.5 },
            velocity,
            seed: 11,
        }
    }

    #[test]
    fn constant_field_and_prefix_property() {
        let p = ModelParams::new(2, 1.0, 1, 1.0, 1.0);
        let s = spec(VelocityField::Constant { value: vec![0.3, -0.1] });
        let a = sample_initial(&s, &p, 8).unwrap();
        assert!(a.velocities.chunks(2).all(|v| v == [0.3, -0.1]));
        let b = sample_initial(&s, &p, 16).unwrap();
        assert_eq!(a.positions[..], b.positions[..16]);
    }

    #[test]
    fn bounds_are_validated() {
        let p = ModelParams::new(1, 1.0, 1, 1.0, 0.4);
        let s = spec(VelocityField::Constant { value: vec![0.1] });
        assert!(matches!(sample_initial(&s, &p, 4), Err(MeanfieldError::InvalidSpec(_))));
        let p = ModelParams::new(1, 1.0, 1, 1.0, 1.0);
        let s = spec(VelocityField::Sinusoid { amplitude: 2.0, wavenumber: 1.0 });
        assert!(sample_initial(&s, &p, 4).is_err());
    }

    #[test]
    fn degenerate_density_overflows() {
        let p = ModelParams::new(1, 1.0, 1, 1.0, 1.0);
        let s = InitialSpec {
            density: Density::TwoBump { separation: 0.0, radius: 5e-324 },
            velocity: VelocityField::Constant { value: vec![0.0] },
            seed: 1,
        };
        assert!(matches!(
            sample_initial(&s, &p, 10),
            Err(MeanfieldError::RejectionOverflow { .. })
        ));
    }

    #[test]
    fn two_speed_split_uses_both_speeds() {
        let p = ModelParams::new(1, 1.0, 1, 1.0, 1.0);
        let s = spec(VelocityField::TwoSpeed { v1: vec![0.5], v2: vec![-0.5] });
        let st = sample_initial(&s, &p, 40).unwrap();
        let up = st.velocities.iter().filter(|v| **v == 0.5).count();
        assert!(up > 5 && up < 35);
    }
}
