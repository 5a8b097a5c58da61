//! Gamma function, its logarithm and the Pochhammer symbol.
//!
//! `ln |Γ(x)|` is delegated to the fdlibm `lgamma_r` port in `libm`, which
//! already applies the reflection formula for negative arguments. This module
//! adds pole detection at the configured integer proximity and sign-tracked
//! ratios of gamma functions.

use crate::error::{HeunError, Result};

use super::{nonpositive_integer, POLE_TOL};

/// `ln |Γ(x)|` together with the sign of `Γ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnGamma {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LnGamma {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// Natural log of `|Γ(x)|` plus a sign flag.
///
/// Fails with [`HeunError::Pole`] when `x` is within [`POLE_TOL`] of zero or
/// a negative integer.
pub fn ln_gamma(x: f64) -> Result<LnGamma> {
    if !x.is_finite() {
        return Err(HeunError::Domain(format!("ln_gamma of non-finite {x}")));
    }
    if let Some(m) = nonpositive_integer(x) {
        return Err(HeunError::Pole(format!(
            "gamma function pole at x = {x} (near -{m}, tolerance {POLE_TOL:e})"
        )));
    }
    let (ln_abs, sign) = libm::lgamma_r(x);
    Ok(LnGamma {
        ln_abs,
        sign: if sign < 0 { -1.0 } else { 1.0 },
    })
}

pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(|g| g.value())
}

/// `1/Γ(x)`, which is entire: zero at the poles of Γ.
pub fn recip_gamma(x: f64) -> f64 {
    match ln_gamma(x) {
        Ok(g) => g.sign * (-g.ln_abs).exp(),
        Err(_) => 0.0,
    }
}

/// Rising factorial `(x)_k = x (x+1) ... (x+k-1)`, `(x)_0 = 1`.
///
/// Evaluated as an iterated product so exact zeros stay exact.
pub fn pochhammer(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (x + j as f64))
}

/// `Π Γ(numerator) / Π Γ(denominator)` computed in log space.
///
/// A denominator argument at a pole contributes `1/Γ = 0` and makes the whole
/// ratio zero; a numerator argument at a pole is an error.
pub fn gamma_ratio(numerator: &[f64], denominator: &[f64]) -> Result<f64> {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &x in numerator {
        let g = ln_gamma(x)?;
        ln += g.ln_abs;
        sign *= g.sign;
    }
    for &x in denominator {
        if nonpositive_integer(x).is_some() {
            return Ok(0.0);
        }
        let g = ln_gamma(x)?;
        ln -= g.ln_abs;
        sign *= g.sign;
    }
    Ok(sign * ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_eq!(ln_gamma(1.0).unwrap().ln_abs, 0.0);
        assert_relative_eq!(ln_gamma(5.0).unwrap().ln_abs, 24f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(
            ln_gamma(0.5).unwrap().ln_abs,
            std::f64::consts::PI.sqrt().ln(),
            epsilon = 1e-14
        );
        assert_relative_eq!(ln_gamma(0.5).unwrap().ln_abs, 0.5723649429247001, epsilon = 1e-14);
    }

    #[test]
    fn ln_gamma_reflection_sign() {
        // Γ(-0.5) = -2√π
        let g = ln_gamma(-0.5).unwrap();
        assert_eq!(g.sign, -1.0);
        assert_relative_eq!(g.value(), -2.0 * std::f64::consts::PI.sqrt(), epsilon = 1e-13);
        // Γ(-1.5) = 4√π/3
        assert_relative_eq!(
            gamma(-1.5).unwrap(),
            4.0 * std::f64::consts::PI.sqrt() / 3.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn ln_gamma_poles() {
        for x in [0.0, -1.0, -7.0, -3.0 + 1e-11] {
            assert!(matches!(ln_gamma(x), Err(HeunError::Pole(_))), "{x}");
        }
        assert!(ln_gamma(-3.0 + 1e-6).is_ok());
        assert_eq!(recip_gamma(-4.0), 0.0);
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(1.0, 4), 24.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
        assert_relative_eq!(pochhammer(0.5, 3), 0.5 * 1.5 * 2.5);
    }

    #[test]
    fn gamma_ratio_zero_on_denominator_pole() {
        assert_eq!(gamma_ratio(&[2.5], &[0.0]).unwrap(), 0.0);
        assert!(gamma_ratio(&[-2.0], &[1.0]).is_err());
        assert_relative_eq!(gamma_ratio(&[6.0], &[4.0]).unwrap(), 20.0, epsilon = 1e-13);
    }
}
