//! Heun parameter model, equation residual and the two reference oracles.

mod frobenius;
mod ode;

pub use frobenius::{eval_local, frobenius_series, LocalSeries, LocalValue, DEFAULT_ORDER};
pub use ode::{integrate_ode, integrate_from_origin, value_near_one, OdeOptions};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{HeunError, Result};

/// Minimum distance from a singular point for pointwise evaluation.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Parameters of the general Heun equation.
///
/// `δ` is not stored: it follows from `1 + α + β = γ + δ + ε` and is returned
/// by [`HeunParams::delta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeunParams {
    pub a: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl HeunParams {
    pub fn new(a: f64, q: f64, alpha: f64, beta: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            a,
            q,
            alpha,
            beta,
            gamma,
            epsilon,
        };
        p.check()?;
        Ok(p)
    }

    /// Re-validates a value that may have been built field by field.
    pub fn check(&self) -> Result<()> {
        let all = [self.a, self.q, self.alpha, self.beta, self.gamma, self.epsilon];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(HeunError::Domain("non-finite Heun parameter".into()));
        }
        if self.a == 0.0 || self.a == 1.0 {
            return Err(HeunError::Domain(format!(
                "singular point a = {} collides with 0 or 1",
                self.a
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        1.0 + self.alpha + self.beta - self.gamma - self.epsilon
    }

    pub fn with_q(self, q: f64) -> Self {
        Self { q, ..self }
    }

    /// Fails if `z` sits on 0, 1 or `a`.
    pub fn check_regular(&self, z: f64) -> Result<()> {
        for s in [0.0, 1.0, self.a] {
            if (z - s).abs() < SINGULAR_TOL {
                return Err(HeunError::Domain(format!("z = {z} is the singular point {s}")));
            }
        }
        Ok(())
    }
}

/// Free-function form of [`HeunParams::new`].
pub fn make_params(a: f64, q: f64, alpha: f64, beta: f64, gamma: f64, epsilon: f64) -> Result<HeunParams> {
    HeunParams::new(a, q, alpha, beta, gamma, epsilon)
}

/// Left-hand side of the Heun equation at `z` for sampled `(u, u', u'')`.
pub fn heun_residual(p: &HeunParams, u: f64, u1: f64, u2: f64, z: f64) -> Result<f64> {
    let r = heun_residual_complex(p, C64::from(p.q), u.into(), u1.into(), u2.into(), z)?;
    Ok(r.re)
}

/// As [`heun_residual`] with a complex accessory parameter and complex samples.
pub fn heun_residual_complex(
    p: &HeunParams,
    q: C64,
    u: C64,
    u1: C64,
    u2: C64,
    z: f64,
) -> Result<C64> {
    p.check_regular(z)?;
    let a = p.a;
    let drift = p.gamma / z + p.delta() / (z - 1.0) + p.epsilon / (z - a);
    let pot = (C64::from(p.alpha * p.beta * z) - q) / (z * (z - 1.0) * (z - a));
    Ok(u2 + u1 * drift + u * pot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta_from_fuchsian_relation() {
        assert_relative_eq!(make_params(0.5, 0.475, 0.5, 1.5, 1.2, 1.0).unwrap().delta(), 0.8, epsilon = 1e-15);
        assert!(make_params(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let p = HeunParams::new(2.0, 0.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.delta(), 1.0);
        let p = HeunParams::new(0.5, 0.475, 0.5, 1.5, 1.2, 1.0).unwrap();
        assert_relative_eq!(p.delta(), 0.8, epsilon = 1e-15);
        assert!(matches!(
            HeunParams::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0),
            Err(HeunError::Domain(_))
        ));
        assert!(HeunParams::new(0.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn trivial_residuals() {
        let p = HeunParams::new(2.0, 0.7, 0.3, 1.1, 1.4, 0.2).unwrap();
        assert_eq!(heun_residual(&p, 0.0, 0.0, 0.0, 0.4).unwrap(), 0.0);
        let p = HeunParams::new(2.0, 0.0, 0.0, 1.1, 1.4, 0.2).unwrap();
        assert_eq!(heun_residual(&p, 1.0, 0.0, 0.0, 0.4).unwrap(), 0.0);
        assert!(heun_residual(&p, 1.0, 0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn power_of_one_minus_z_solves_alpha_case() {
        // ε + γ − α = 0 and q = aγ(δ − 1)
        let (a, gamma, eps, delta) = (2.0, 0.6, 0.9, 1.4);
        let alpha = eps + gamma;
        let beta = gamma + delta + eps - 1.0 - alpha;
        let q = a * gamma * (delta - 1.0);
        let p = HeunParams::new(a, q, alpha, beta, gamma, eps).unwrap();
        assert_relative_eq!(p.delta(), delta, epsilon = 1e-15);
        let z: f64 = 0.3;
        let e = 1.0 - delta;
        let u = (1.0 - z).powf(e);
        let u1 = -e * (1.0 - z).powf(e - 1.0);
        let u2 = e * (e - 1.0) * (1.0 - z).powf(e - 2.0);
        assert!(heun_residual(&p, u, u1, u2, z).unwrap().abs() < 1e-12);
    }
}
