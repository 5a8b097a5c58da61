//! Generalized hypergeometric series `p+1Fp(upper; lower; 1)`.
//!
//! With parametric excess `s = Σ lower − Σ upper > 0` the terms decay like
//! `k^(-1-s)` and the partial sums approach the limit as
//! `S_n = S + n^(-s) (d0 + d1/n + d2/n^2 + ...)`. The exponents are known, so
//! partial sums at `n0, 2 n0, 4 n0, ...` are Richardson-extrapolated in
//! `s, s+1, s+2, ...`.

use num_complex::Complex64 as C64;

use crate::accel::{Neumaier, Richardson};
use crate::error::{HeunError, Result};

use super::{nonpositive_integer, SeriesValue};

const CAP: usize = 1_000_000;
const LEVELS: usize = 7;
/// Relative tolerance for cancelling a matched upper/lower pair.
const CANCEL_TOL: f64 = 1e-14;

/// `p+1Fp(upper; lower; 1)` for `upper.len() == lower.len() + 1`.
pub fn hyper_unit(upper: &[f64], lower: &[f64], tol: f64) -> Result<SeriesValue> {
    if upper.len() != lower.len() + 1 {
        return Err(HeunError::Domain(format!(
            "unit-argument series needs p = q + 1, got {}F{}",
            upper.len(),
            lower.len()
        )));
    }
    if upper.iter().chain(lower).any(|x| !x.is_finite()) {
        return Err(HeunError::Domain("non-finite hypergeometric parameter".into()));
    }

    let degree = upper.iter().filter_map(|&u| nonpositive_integer(u)).min();
    for &l in lower {
        if let Some(m) = nonpositive_integer(l) {
            if degree.is_none_or(|d| d > m) {
                return Err(HeunError::Pole(format!(
                    "lower parameter {l} is a non-positive integer"
                )));
            }
        }
    }
    if let Some(d) = degree {
        return Ok(finite_sum(upper, lower, d as usize));
    }

    let excess: f64 = lower.iter().sum::<f64>() - upper.iter().sum::<f64>();
    if excess <= 0.0 {
        return Err(HeunError::Domain(format!(
            "parametric excess {excess} <= 0: series diverges at unit argument"
        )));
    }
    extrapolated_sum(upper, lower, excess, tol)
}

/// Clausen's `₃F₂(u1, u2, u3; l1, l2; 1)`.
pub fn hyper_3f2_unit(upper: [f64; 3], lower: [f64; 2], tol: f64) -> Result<SeriesValue> {
    hyper_unit(&upper, &lower, tol)
}

/// `₄F₃(upper; lower; 1)`; a matched upper/lower pair is cancelled first and
/// the remainder delegated to [`hyper_3f2_unit`].
pub fn hyper_4f3_unit(upper: [f64; 4], lower: [f64; 3], tol: f64) -> Result<SeriesValue> {
    for (i, &u) in upper.iter().enumerate() {
        for (j, &l) in lower.iter().enumerate() {
            if (u - l).abs() <= CANCEL_TOL * u.abs().max(1.0) && nonpositive_integer(l).is_none() {
                let mut up = [0.0; 3];
                let mut lo = [0.0; 2];
                for (dst, &x) in up.iter_mut().zip(upper.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, x)| x)) {
                    *dst = x;
                }
                for (dst, &x) in lo.iter_mut().zip(lower.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x)) {
                    *dst = x;
                }
                return hyper_3f2_unit(up, lo, tol);
            }
        }
    }
    hyper_unit(&upper, &lower, tol)
}

fn term_ratio(upper: &[f64], lower: &[f64], k: f64) -> f64 {
    let num: f64 = upper.iter().map(|u| u + k).product();
    let den: f64 = lower.iter().map(|l| l + k).product();
    num / (den * (k + 1.0))
}

fn finite_sum(upper: &[f64], lower: &[f64], degree: usize) -> SeriesValue {
    let mut sum = Neumaier::new();
    let mut t = 1.0;
    sum.add_real(t);
    for k in 0..degree {
        t *= term_ratio(upper, lower, k as f64);
        sum.add_real(t);
    }
    SeriesValue {
        value: sum.value().re,
        abs_error_estimate: 4.0 * f64::EPSILON * sum.abs_mass(),
        terms_used: degree + 1,
        converged: true,
    }
}

fn extrapolated_sum(upper: &[f64], lower: &[f64], excess: f64, tol: f64) -> Result<SeriesValue> {
    let scale = upper
        .iter()
        .chain(lower)
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let mut n0 = 32usize;
    while (n0 as f64) < 4.0 * scale + 8.0 {
        n0 *= 2;
    }

    let mut sum = Neumaier::new();
    let mut t = 1.0;
    sum.add_real(t);
    let mut k = 0usize;
    let mut rich = Richardson::new(excess, 1.0, LEVELS);
    let mut last_err = f64::INFINITY;
    let mut target = n0;

    while target <= CAP {
        while k + 1 < target {
            t *= term_ratio(upper, lower, k as f64);
            sum.add_real(t);
            k += 1;
        }
        let s = sum.value().re;
        let floor = 16.0 * f64::EPSILON * sum.abs_mass();
        // Integral comparison of the remaining tail against k^(-1-s).
        let direct = t.abs() * (k as f64) / excess;
        if direct <= tol.max(floor) {
            return Ok(SeriesValue::new(s, direct + floor, k + 1, tol));
        }
        let (best, delta) = rich.push(C64::new(s, 0.0));
        if rich.len() >= 3 {
            let err = delta + floor;
            if err <= tol || (err >= last_err && err <= 1e3 * floor) {
                return Ok(SeriesValue::new(best.re, err, k + 1, tol));
            }
            last_err = err;
        }
        target *= 2;
    }
    Err(HeunError::NoConvergence {
        terms: k + 1,
        estimate: last_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const ZETA3: f64 = 1.202_056_903_159_594_3;

    #[test]
    fn basel_and_apery() {
        let v = hyper_3f2_unit([1.0, 1.0, 1.0], [2.0, 2.0], 1e-12).unwrap();
        assert!(v.converged);
        assert_relative_eq!(v.value, PI * PI / 6.0, epsilon = 1e-12);
        let v = hyper_4f3_unit([1.0, 1.0, 1.0, 1.0], [2.0, 2.0, 2.0], 1e-12).unwrap();
        assert_relative_eq!(v.value, ZETA3, epsilon = 1e-12);
    }

    #[test]
    fn terminating_cases() {
        assert_eq!(hyper_3f2_unit([0.0, 2.5, 3.0], [1.5, 0.5], 1e-12).unwrap().value, 1.0);
        assert_eq!(hyper_4f3_unit([1.0, 0.0, 2.0, 3.0], [1.5, 0.5, 2.0], 1e-12).unwrap().value, 1.0);
        let v = hyper_3f2_unit([-1.0, 2.0, 3.0], [4.0, 1.0], 1e-12).unwrap();
        assert_relative_eq!(v.value, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn pair_cancellation_delegates() {
        let u = [1.0, 0.3, 0.45, 0.8];
        let l = [1.0, 1.7, 1.25];
        let a = hyper_4f3_unit(u, l, 1e-12).unwrap();
        let b = hyper_3f2_unit([0.3, 0.45, 0.8], [1.7, 1.25], 1e-12).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn saalschutz_closed_form() {
        // 3F2(-n, a, b; c, 1+a+b-c-n; 1) = (c-a)_n (c-b)_n / ((c)_n (c-a-b)_n)
        use crate::hypergeom::pochhammer as ph;
        let (n, a, b, c) = (4usize, 0.3, 1.7, 2.2);
        let v = hyper_3f2_unit([-(n as f64), a, b], [c, 1.0 + a + b - c - n as f64], 1e-14).unwrap();
        let exact = ph(c - a, n) * ph(c - b, n) / (ph(c, n) * ph(c - a - b, n));
        assert_relative_eq!(v.value, exact, max_relative = 1e-12);
    }

    #[test]
    fn small_excess_accelerated() {
        // 3F2(1,1,1;2,2) has excess 1; s = 0.3 case against a Gauss closed form:
        // 3F2(a, b, 1; c, 1; 1) = 2F1(a, b; c; 1).
        let (a, b, c) = (0.4, 0.9, 1.6);
        let v = hyper_3f2_unit([a, b, 1.5], [c, 1.5], 1e-10).unwrap();
        let exact = crate::hypergeom::gamma_ratio(&[c, c - a - b], &[c - a, c - b]).unwrap();
        assert!(v.converged, "{v:?}");
        assert_relative_eq!(v.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn domain_and_pole_errors() {
        assert!(matches!(
            hyper_3f2_unit([1.0, 1.0, 1.0], [1.0, 1.0], 1e-10),
            Err(HeunError::Domain(_))
        ));
        assert!(matches!(
            hyper_3f2_unit([1.0, 1.0, 1.0], [-2.0, 6.0], 1e-10),
            Err(HeunError::Pole(_))
        ));
        assert!(hyper_3f2_unit([-1.0, 1.0, 1.0], [-2.0, 6.0], 1e-10).is_ok());
    }
}
