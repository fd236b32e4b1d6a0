use serde::{Deserialize, Serialize};

use super::DynamicsError;

/// Largest supported ambient dimension. Per-row accumulators live on the
/// stack with this many slots.
pub const MAX_DIM: usize = 8;

/// Parameters of the particle model.
///
/// `speed_bound` plays the role of the uniform velocity bound `M`: every
/// velocity stays inside `B(M)` and every position inside `(T+1) B(M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub dim: usize,
    pub alpha: f64,
    pub n_particles: usize,
    pub horizon: f64,
    pub speed_bound: f64,
    /// Optional lower floor on pair distances inside the kernel. Off by
    /// default; the model is exactly singular.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_floor: Option<f64>,
}

impl ModelParams {
    pub fn new(dim: usize, alpha: f64, n_particles: usize, horizon: f64, speed_bound: f64) -> Self {
        Self {
            dim,
            alpha,
            n_particles,
            horizon,
            speed_bound,
            kernel_floor: None,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::InvalidParams(m));
        if self.dim == 0 || self.dim > MAX_DIM {
            return bad(format!("dim must be in 1..={MAX_DIM}, got {}", self.dim));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if self.n_particles == 0 {
            return bad("n_particles must be >= 1".into());
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be > 0, got {}", self.horizon));
        }
        if !(self.speed_bound > 0.0) || !self.speed_bound.is_finite() {
            return bad(format!("speed_bound must be > 0, got {}", self.speed_bound));
        }
        if let Some(eps) = self.kernel_floor {
            if !(eps > 0.0) {
                return bad(format!("kernel_floor must be > 0 when set, got {eps}"));
            }
        }
        Ok(())
    }

    /// `alpha >= d`: limits are monokinetic.
    pub fn monokinetic_regime(&self) -> bool {
        self.alpha >= self.dim as f64
    }

    /// `alpha <= 2`: range covered by the mean-field existence result.
    pub fn mean_field_regime(&self) -> bool {
        self.alpha <= 2.0
    }

    /// Spatial support radius `(T+1) M`.
    pub fn position_bound(&self) -> f64 {
        (self.horizon + 1.0) * self.speed_bound
    }
}
