use serde::{Deserialize, Serialize};

use crate::dynamics::ModelParams;
use crate::rng::Stream;

use super::WeakformError;

/// Quartic bump `(1 - |z - c|^2 / w^2)^4` on the ball of radius `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
}

impl Bump {
    pub fn value(&self, z: &[f64]) -> f64 {
        let s = self.s(z);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s).powi(4)
        }
    }

    pub fn grad(&self, z: &[f64], out: &mut [f64]) {
        let s = self.s(z);
        let f = if s >= 1.0 {
            0.0
        } else {
            -8.0 * (1.0 - s).powi(3) / (self.width * self.width)
        };
        for k in 0..z.len() {
            out[k] = f * (z[k] - self.center[k]);
        }
    }

    fn s(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            / (self.width * self.width)
    }

    fn bound(&self) -> FactorBound {
        FactorBound {
            sup: 1.0,
            grad: 8.0 / self.width,
            hess: 56.0 / (self.width * self.width),
        }
    }
}

/// Time window: a one-dimensional bump with `center + half_width <= T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: f64,
    pub half_width: f64,
}

impl Window {
    pub fn value(&self, t: f64) -> f64 {
        let s = ((t - self.center) / self.half_width).powi(2);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s).powi(4)
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let s = ((t - self.center) / self.half_width).powi(2);
        if s >= 1.0 {
            0.0
        } else {
            -8.0 * (1.0 - s).powi(3) * (t - self.center) / (self.half_width * self.half_width)
        }
    }

    fn bound(&self) -> FactorBound {
        FactorBound {
            sup: 1.0,
            grad: 8.0 / self.half_width,
            hess: 56.0 / (self.half_width * self.half_width),
        }
    }
}

/// Velocity factor of a product test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityFactor {
    /// `chi_a(v)`: 1 on `|v| <= a`, 0 on `|v| >= 2a`, smoothstep between.
    Plateau { radius: f64 },
    /// `v_k chi_a(v)`.
    Component { index: usize, radius: f64 },
    /// `|v|^2 chi_a(v)`.
    Square { radius: f64 },
    Bump(Bump),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Continuity,
    Momentum,
    Energy,
    Generic,
    Polynomial,
    VelocityOnly,
}

/// `phi(t, x, v) = tau(t) S(x) V(v)` with `S = bump * monomial`. Missing
/// time or space factors are the constant 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub family: Family,
    pub window: Option<Window>,
    pub space: Option<Bump>,
    /// Exponents of `((x - c) / w)` over the space bump.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monomial: Option<Vec<u32>>,
    pub velocity: VelocityFactor,
}

/// Certified sup norms of a factor and of its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorBound {
    pub sup: f64,
    pub grad: f64,
    pub hess: f64,
}

impl FactorBound {
    const ONE: FactorBound = FactorBound {
        sup: 1.0,
        grad: 0.0,
        hess: 0.0,
    };

    fn times(self, o: FactorBound) -> FactorBound {
        FactorBound {
            sup: self.sup * o.sup,
            grad: self.grad * o.sup + self.sup * o.grad,
            hess: self.hess * o.sup + 2.0 * self.grad * o.grad + self.sup * o.hess,
        }
    }
}

/// Certified bounds on `phi` and `grad_v phi` over all of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestBounds {
    pub sup: f64,
    pub lipschitz: f64,
    pub grad_v_sup: f64,
    pub grad_v_lipschitz: f64,
}

// Smoothstep S(s) = 6s^5 - 15s^4 + 10s^3 on [0, 1].
fn smoothstep(s: f64) -> (f64, f64) {
    let s = s.clamp(0.0, 1.0);
    let v = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    let d = 30.0 * s * s * (1.0 - s) * (1.0 - s);
    (v, d)
}

const SMOOTHSTEP_D1: f64 = 1.875;
const SMOOTHSTEP_D2: f64 = 5.78;

fn plateau(v: &[f64], a: f64, grad: &mut [f64]) -> f64 {
    let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    grad.iter_mut().for_each(|g| *g = 0.0);
    if r <= a {
        return 1.0;
    }
    if r >= 2.0 * a {
        return 0.0;
    }
    let (s, ds) = smoothstep((r - a) / a);
    for k in 0..v.len() {
        grad[k] = -ds / a * v[k] / r;
    }
    1.0 - s
}

fn plateau_bound(a: f64) -> FactorBound {
    FactorBound {
        sup: 1.0,
        grad: SMOOTHSTEP_D1 / a,
        hess: (SMOOTHSTEP_D2 + SMOOTHSTEP_D1) / (a * a),
    }
}

impl VelocityFactor {
    /// Value and gradient.
    pub fn eval(&self, v: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            VelocityFactor::Plateau { radius } => plateau(v, *radius, grad),
            VelocityFactor::Component { index, radius } => {
                let chi = plateau(v, *radius, grad);
                let vk = v[*index];
                grad.iter_mut().for_each(|g| *g *= vk);
                grad[*index] += chi;
                vk * chi
            }
            VelocityFactor::Square { radius } => {
                let chi = plateau(v, *radius, grad);
                let v2: f64 = v.iter().map(|c| c * c).sum();
                for k in 0..v.len() {
                    grad[k] = grad[k] * v2 + 2.0 * v[k] * chi;
                }
                v2 * chi
            }
            VelocityFactor::Bump(b) => {
                b.grad(v, grad);
                b.value(v)
            }
        }
    }

    fn bound(&self) -> FactorBound {
        match self {
            VelocityFactor::Plateau { radius } => plateau_bound(*radius),
            VelocityFactor::Component { radius, .. } => {
                let a = *radius;
                let lin = FactorBound {
                    sup: 2.0 * a,
                    grad: 1.0,
                    hess: 0.0,
                };
                lin.times(plateau_bound(a))
            }
            VelocityFactor::Square { radius } => {
                let a = *radius;
                let sq = FactorBound {
                    sup: 4.0 * a * a,
                    grad: 4.0 * a,
                    hess: 2.0,
                };
                sq.times(plateau_bound(a))
            }
            VelocityFactor::Bump(b) => b.bound(),
        }
    }

    /// Radius of a ball containing the support.
    pub fn support_radius(&self) -> f64 {
        match self {
            VelocityFactor::Plateau { radius }
            | VelocityFactor::Component { radius, .. }
            | VelocityFactor::Square { radius } => 2.0 * radius,
            VelocityFactor::Bump(b) => b.center.iter().map(|c| c * c).sum::<f64>().sqrt() + b.width,
        }
    }
}

impl TestFunction {
    pub fn time_factor(&self, t: f64) -> (f64, f64) {
        match &self.window {
            Some(w) => (w.value(t), w.derivative(t)),
            None => (1.0, 0.0),
        }
    }

    /// Spatial factor `S(x)` and its gradient.
    pub fn space_factor(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let Some(b) = &self.space else {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return 1.0;
        };
        let bump = b.value(x);
        b.grad(x, grad);
        let Some(m) = &self.monomial else {
            return bump;
        };
        let d = x.len();
        let z: Vec<f64> = (0..d).map(|k| (x[k] - b.center[k]) / b.width).collect();
        let mono: f64 = (0..d).map(|k| z[k].powi(m[k] as i32)).product();
        for k in 0..d {
            let dmono = if m[k] == 0 {
                0.0
            } else {
                let others: f64 = (0..d)
                    .filter(|&j| j != k)
                    .map(|j| z[j].powi(m[j] as i32))
                    .product();
                m[k] as f64 * z[k].powi(m[k] as i32 - 1) * others / b.width
            };
            grad[k] = grad[k] * mono + bump * dmono;
        }
        bump * mono
    }

    /// `phi`, `d_t phi`, `grad_x phi`, `grad_v phi`. Gradient buffers must
    /// have length `d`.
    pub fn eval(&self, t: f64, x: &[f64], v: &[f64], gx: &mut [f64], gv: &mut [f64]) -> (f64, f64) {
        let (tau, dtau) = self.time_factor(t);
        let s = self.space_factor(x, gx);
        let vf = self.velocity.eval(v, gv);
        for g in gx.iter_mut() {
            *g *= tau * vf;
        }
        for g in gv.iter_mut() {
            *g *= tau * s;
        }
        (tau * s * vf, dtau * s * vf)
    }

    pub fn value(&self, t: f64, x: &[f64], v: &[f64]) -> f64 {
        let d = x.len();
        let mut gx = vec![0.0; d];
        let mut gv = vec![0.0; d];
        self.eval(t, x, v, &mut gx, &mut gv).0
    }

    fn space_bound(&self) -> FactorBound {
        let Some(b) = &self.space else {
            return FactorBound::ONE;
        };
        let bump = b.bound();
        match &self.monomial {
            None => bump,
            Some(m) => {
                let deg: f64 = m.iter().map(|e| *e as f64).sum();
                let mono = FactorBound {
                    sup: 1.0,
                    grad: deg / b.width,
                    hess: deg * deg / (b.width * b.width),
                };
                bump.times(mono)
            }
        }
    }

    pub fn bounds(&self) -> TestBounds {
        let tb = self.window.as_ref().map_or(FactorBound::ONE, Window::bound);
        let sb = self.space_bound();
        let vb = self.velocity.bound();
        TestBounds {
            sup: tb.sup * sb.sup * vb.sup,
            lipschitz: tb.grad * sb.sup * vb.sup + tb.sup * sb.grad * vb.sup + tb.sup * sb.sup * vb.grad,
            grad_v_sup: tb.sup * sb.sup * vb.grad,
            grad_v_lipschitz: tb.grad * sb.sup * vb.grad
                + tb.sup * sb.grad * vb.grad
                + tb.sup * sb.sup * vb.hess,
        }
    }

    /// Whether the function vanishes identically at `t >= horizon`.
    pub fn vanishes_after(&self, horizon: f64) -> bool {
        self.window
            .as_ref()
            .is_some_and(|w| w.center + w.half_width <= horizon)
    }

    /// Largest discrepancy between analytic derivatives and central
    /// differences at `count` seeded points, relative to
    /// `max(|analytic|, lipschitz bound)`.
    pub fn gradient_check(&self, dim: usize, horizon: f64, count: usize, seed: u64) -> f64 {
        let mut rng = Stream::new(seed, 0);
        let reach_x = self.space.as_ref().map_or(1.0, |b| {
            b.center.iter().map(|c| c * c).sum::<f64>().sqrt() + b.width
        });
        let reach_v = self.velocity.support_radius();
        let scale = self.bounds().lipschitz.max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        let mut gx = vec![0.0; dim];
        let mut gv = vec![0.0; dim];
        let mut tmp = (vec![0.0; dim], vec![0.0; dim]);
        for _ in 0..count {
            let t = rng.range(0.0, horizon);
            let x: Vec<f64> = (0..dim).map(|_| rng.range(-reach_x, reach_x)).collect();
            let v: Vec<f64> = (0..dim).map(|_| rng.range(-reach_v, reach_v)).collect();
            let (_, dt) = self.eval(t, &x, &v, &mut gx, &mut gv);
            let mut f = |t: f64, x: &[f64], v: &[f64]| self.eval(t, x, v, &mut tmp.0, &mut tmp.1).0;
            let mut check = |analytic: f64, numeric: f64| {
                let err = (analytic - numeric).abs() / analytic.abs().max(scale);
                worst = worst.max(err);
            };
            let h = 1e-5 * horizon.max(1.0);
            check(dt, (f(t + h, &x, &v) - f(t - h, &x, &v)) / (2.0 * h));
            for k in 0..dim {
                let h = 1e-5 * reach_x;
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[k] += h;
                xm[k] -= h;
                check(gx[k], (f(t, &xp, &v) - f(t, &xm, &v)) / (2.0 * h));
                let h = 1e-5 * reach_v;
                let (mut vp, mut vm) = (v.clone(), v.clone());
                vp[k] += h;
                vm[k] -= h;
                check(gv[k], (f(t, &x, &vp) - f(t, &x, &vm)) / (2.0 * h));
            }
        }
        worst
    }
}

fn random_in_ball(rng: &mut Stream, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.range(-radius, radius)).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

fn random_window(rng: &mut Stream, horizon: f64) -> Window {
    let half_width = rng.range(0.4, 0.9) * horizon;
    let center = rng.range(-0.3 * horizon, horizon - half_width);
    Window { center, half_width }
}

/// Deterministic battery of `size` test functions cycling through the
/// continuity, momentum, energy, generic and polynomial families. Every
/// member vanishes for `t >= T` and is supported in
/// `B(2 (T+1) M) x B(2M)`.
pub fn test_battery(params: &ModelParams, size: usize, seed: u64) -> Result<Vec<TestFunction>, WeakformError> {
    params.validate().map_err(|e| WeakformError::InvalidInput(e.to_string()))?;
    if size == 0 {
        return Err(WeakformError::InvalidInput("battery size must be >= 1".into()));
    }
    let d = params.dim;
    let m = params.speed_bound;
    let reach = params.position_bound();
    Ok((0..size)
        .map(|k| {
            let mut rng = Stream::new(seed, k as u64);
            let window = Some(random_window(&mut rng, params.horizon));
            let space = Some(Bump {
                center: random_in_ball(&mut rng, d, 0.5 * reach),
                width: rng.range(0.5, 1.0) * reach,
            });
            let (family, monomial, velocity) = match k % 5 {
                0 => (Family::Continuity, None, VelocityFactor::Plateau { radius: m }),
                1 => (
                    Family::Momentum,
                    None,
                    VelocityFactor::Component {
                        index: (k / 5) % d,
                        radius: m,
                    },
                ),
                2 => (Family::Energy, None, VelocityFactor::Square { radius: m }),
                3 => (
                    Family::Generic,
                    None,
                    VelocityFactor::Bump(Bump {
                        center: random_in_ball(&mut rng, d, 0.5 * m),
                        width: rng.range(0.5, 1.0) * m,
                    }),
                ),
                _ => {
                    let exps = (0..d).map(|_| (rng.next_u64() % 3) as u32).collect();
                    (
                        Family::Polynomial,
                        Some(exps),
                        VelocityFactor::Bump(Bump {
                            center: random_in_ball(&mut rng, d, 0.5 * m),
                            width: rng.range(0.5, 1.0) * m,
                        }),
                    )
                }
            };
            TestFunction {
                family,
                window,
                space,
                monomial,
                velocity,
            }
        })
        .collect())
}

/// Nonnegative velocity-only bumps for the steady-flow check.
pub fn velocity_probes(params: &ModelParams, count: usize, seed: u64) -> Vec<TestFunction> {
    let d = params.dim;
    let m = params.speed_bound;
    (0..count)
        .map(|k| {
            let mut rng = Stream::new(seed, (1 << 32) + k as u64);
            TestFunction {
                family: Family::VelocityOnly,
                window: None,
                space: None,
                monomial: None,
                velocity: VelocityFactor::Bump(Bump {
                    center: random_in_ball(&mut rng, d, m),
                    width: rng.range(0.5, 1.0) * m,
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: usize) -> ModelParams {
        ModelParams::new(d, 1.0, 10, 1.0, 1.0)
    }

    #[test]
    fn battery_is_deterministic_and_vanishes_at_horizon() {
        let p = params(2);
        let a = test_battery(&p, 24, 7).unwrap();
        assert_eq!(a, test_battery(&p, 24, 7).unwrap());
        assert_ne!(a, test_battery(&p, 24, 8).unwrap());
        assert_eq!(test_battery(&p, 1, 7).unwrap()[0], a[0]);
        for f in &a {
            assert!(f.vanishes_after(p.horizon));
            assert_eq!(f.value(p.horizon, &[0.1, 0.2], &[0.3, -0.2]), 0.0);
        }
    }

    #[test]
    fn gradients_match_differences() {
        for d in [1, 2] {
            for (k, f) in test_battery(&params(d), 10, 3).unwrap().iter().enumerate() {
                let err = f.gradient_check(d, 1.0, 100, k as u64);
                assert!(err < 1e-6, "member {k} d={d}: {err:e}");
            }
        }
    }

    #[test]
    fn plateau_is_one_on_the_speed_ball() {
        let f = VelocityFactor::Plateau { radius: 1.0 };
        let mut g = [0.0; 2];
        assert_eq!(f.eval(&[0.6, 0.8], &mut g), 1.0);
        assert_eq!(f.eval(&[2.0, 0.0], &mut g), 0.0);
        let mid = f.eval(&[1.5, 0.0], &mut g);
        assert!((mid - 0.5).abs() < 1e-15);
    }
}
