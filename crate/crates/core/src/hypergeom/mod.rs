//! Scalar special-function kernels: gamma, Pochhammer, Gauss ₂F₁ on `[0, 1]`
//! and `p+1Fp` at unit argument.

mod gamma;
mod gauss;
mod unit;

pub use gamma::{gamma, gamma_ratio, ln_gamma, pochhammer, recip_gamma, LnGamma};
pub use gauss::{gauss_2f1, gauss_2f1_derivative};
pub use unit::{hyper_3f2_unit, hyper_4f3_unit, hyper_unit};

use serde::Serialize;

use crate::error::{HeunError, Result};

/// Distance from a non-positive integer below which a parameter is a pole.
pub const POLE_TOL: f64 = 1e-9;

/// Returns `Some(m)` when `x` is within [`POLE_TOL`] of `-m` for `m >= 0`.
pub fn nonpositive_integer(x: f64) -> Option<u64> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= POLE_TOL {
        Some((-r) as u64)
    } else {
        None
    }
}

/// Numeric result of a series together with its error bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue<T = f64> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub terms_used: usize,
    pub converged: bool,
}

impl<T> SeriesValue<T> {
    pub(crate) fn new(value: T, abs_error_estimate: f64, terms_used: usize, tol: f64) -> Self {
        Self {
            value,
            abs_error_estimate,
            terms_used,
            converged: abs_error_estimate <= tol,
        }
    }
}

impl SeriesValue<f64> {
    pub(crate) fn exact(value: f64, terms_used: usize) -> Self {
        Self {
            value,
            abs_error_estimate: 4.0 * f64::EPSILON * value.abs(),
            terms_used: terms_used.max(1),
            converged: true,
        }
    }
}

/// Parameters of `₂F₁(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperParams2F1 {
    pub upper_a: f64,
    pub upper_b: f64,
    pub lower_c: f64,
    pub argument_z: f64,
}

impl HyperParams2F1 {
    pub fn new(upper_a: f64, upper_b: f64, lower_c: f64, argument_z: f64) -> Self {
        Self {
            upper_a,
            upper_b,
            lower_c,
            argument_z,
        }
    }

    /// Degree of the polynomial when `a` or `b` is a non-positive integer.
    pub fn terminating_degree(&self) -> Option<u64> {
        match (
            nonpositive_integer(self.upper_a),
            nonpositive_integer(self.upper_b),
        ) {
            (Some(m), Some(n)) => Some(m.min(n)),
            (Some(m), None) | (None, Some(m)) => Some(m),
            (None, None) => None,
        }
    }

    /// Checks the parameter contract.
    pub fn validate(&self) -> Result<()> {
        let Self {
            upper_a: a,
            upper_b: b,
            lower_c: c,
            argument_z: z,
        } = *self;
        if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
            return Err(HeunError::Domain("non-finite 2F1 parameter".into()));
        }
        if !(0.0..=1.0).contains(&z) {
            return Err(HeunError::Domain(format!("2F1 argument z = {z} outside [0, 1]")));
        }
        let degree = self.terminating_degree();
        if let Some(m) = nonpositive_integer(c) {
            // (c)_k vanishes for k > m; harmless only if the series stops first.
            if degree.is_none_or(|d| d > m) {
                return Err(HeunError::Pole(format!(
                    "2F1 lower parameter c = {c} is a non-positive integer"
                )));
            }
        }
        if z == 1.0 && degree.is_none() && c - a - b <= 0.0 {
            return Err(HeunError::Domain(format!(
                "2F1 at z = 1 diverges: c - a - b = {} <= 0",
                c - a - b
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_proximity() {
        assert_eq!(nonpositive_integer(0.0), Some(0));
        assert_eq!(nonpositive_integer(-3.0 + 5e-10), Some(3));
        assert_eq!(nonpositive_integer(-3.0 + 5e-9), None);
        assert_eq!(nonpositive_integer(2.0), None);
    }

    #[test]
    fn validate_contract() {
        assert!(HyperParams2F1::new(1.0, 1.0, 2.0, 0.5).validate().is_ok());
        assert!(HyperParams2F1::new(1.0, 1.0, 2.0, 1.2).validate().is_err());
        assert!(HyperParams2F1::new(1.0, 1.0, 2.0, 1.0).validate().is_err());
        assert!(HyperParams2F1::new(0.5, 0.5, 2.0, 1.0).validate().is_ok());
        assert!(matches!(
            HyperParams2F1::new(1.0, 1.0, -2.0, 0.5).validate(),
            Err(HeunError::Pole(_))
        ));
        assert!(HyperParams2F1::new(-2.0, 1.0, -2.0, 0.5).validate().is_ok());
        assert!(HyperParams2F1::new(-3.0, 1.0, -2.0, 0.5).validate().is_err());
    }
}
