//! Exponent-0 power-series solution at `z = 0`.
//!
//! Multiplying the equation by `z (z-1) (z-a)` and collecting `z^k` gives
//!
//! ```text
//! a (k+1)(k+γ) c[k+1] = [k((k-1+γ)(1+a) + aδ + ε) + q] c[k] - (k-1+α)(k-1+β) c[k-1]
//! ```
//!
//! with `c[0] = 1`, `c[-1] = 0`.

use serde::Serialize;

use crate::error::{HeunError, Result};
use crate::hypergeom::nonpositive_integer;

use super::HeunParams;

pub const DEFAULT_ORDER: usize = 60;
const EARLY_STOP: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalSeries {
    pub coefficients: Vec<f64>,
    pub radius_hint: f64,
}

/// Value of a [`LocalSeries`] and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalValue {
    pub u: f64,
    pub u1: f64,
    pub u2: f64,
    /// Magnitude of the last included term `|c_k z^k|`.
    pub tail: f64,
}

pub fn frobenius_series(p: &HeunParams, order: usize) -> Result<LocalSeries> {
    if nonpositive_integer(p.gamma).is_some() {
        return Err(HeunError::Pole(format!(
            "gamma = {} is a non-positive integer: no exponent-0 series",
            p.gamma
        )));
    }
    let order = order.max(2);
    let (a, d, e) = (p.a, p.delta(), p.epsilon);
    let mut c = Vec::with_capacity(order + 1);
    c.push(1.0);
    let mut prev = 0.0;
    for k in 0..order {
        let kf = k as f64;
        let mid = kf * ((kf - 1.0 + p.gamma) * (1.0 + a) + a * d + e) + p.q;
        let low = (kf - 1.0 + p.alpha) * (kf - 1.0 + p.beta);
        let next = (mid * c[k] - low * prev) / (a * (kf + 1.0) * (kf + p.gamma));
        prev = c[k];
        c.push(next);
    }
    Ok(LocalSeries {
        coefficients: c,
        radius_hint: p.a.abs().min(1.0),
    })
}

pub fn eval_local(series: &LocalSeries, z: f64) -> Result<LocalValue> {
    if z.abs() >= series.radius_hint {
        return Err(HeunError::Domain(format!(
            "|z| = {} outside the local radius {}",
            z.abs(),
            series.radius_hint
        )));
    }
    if z == 0.0 {
        let c = &series.coefficients;
        return Ok(LocalValue {
            u: c[0],
            u1: c.get(1).copied().unwrap_or(0.0),
            u2: 2.0 * c.get(2).copied().unwrap_or(0.0),
            tail: 0.0,
        });
    }
    let (mut u, mut u1, mut u2) = (0.0, 0.0, 0.0);
    let mut zk = 1.0;
    let mut tail = 0.0;
    let mut small_run = 0;
    for (k, &ck) in series.coefficients.iter().enumerate() {
        let kf = k as f64;
        let term = ck * zk;
        u += term;
        if k >= 1 {
            u1 += kf * ck * zk / z;
        }
        if k >= 2 {
            u2 += kf * (kf - 1.0) * ck * zk / (z * z);
        }
        tail = term.abs();
        // Two consecutive negligible terms, so an isolated zero coefficient
        // does not end the sum.
        small_run = if tail < EARLY_STOP { small_run + 1 } else { 0 };
        if k >= 2 && small_run >= 2 {
            break;
        }
        zk *= z;
    }
    Ok(LocalValue { u, u1, u2, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heun::heun_residual;
    use crate::hypergeom::pochhammer;
    use approx::assert_relative_eq;

    #[test]
    fn first_row() {
        let p = HeunParams::new(2.0, 1.0, 0.7, 1.3, 1.0, 0.4).unwrap();
        let s = frobenius_series(&p, 10).unwrap();
        assert_eq!(s.coefficients[0], 1.0);
        assert_relative_eq!(s.coefficients[1], 0.5, epsilon = 1e-15);
        // k = 1 row by hand: 2a(1+γ) c2 = [γ(1+a) + aδ + ε + q] c1 − αβ c0
        let d = p.delta();
        let c2 = ((1.0 * 3.0 + 2.0 * d + 0.4 + 1.0) * 0.5 - 0.7 * 1.3) / (2.0 * 2.0 * 2.0);
        assert_relative_eq!(s.coefficients[2], c2, epsilon = 1e-15);
    }

    #[test]
    fn constant_solution() {
        let p = HeunParams::new(2.0, 0.0, 0.0, 1.3, 1.1, 0.4).unwrap();
        let s = frobenius_series(&p, 20).unwrap();
        assert!(s.coefficients[1..].iter().all(|&c| c == 0.0));
        let v = eval_local(&s, 0.3).unwrap();
        assert_eq!((v.u, v.u1), (1.0, 0.0));
    }

    #[test]
    fn hypergeometric_reduction() {
        let (a, al, be, ga) = (2.0, 0.7, 1.3, 1.6);
        let p = HeunParams::new(a, a * al * be, al, be, ga, 0.0).unwrap();
        let s = frobenius_series(&p, 12).unwrap();
        for k in 0..=10 {
            let t = pochhammer(al, k) * pochhammer(be, k)
                / (pochhammer(ga, k) * pochhammer(1.0, k));
            assert_relative_eq!(s.coefficients[k], t, max_relative = 1e-12);
        }
    }

    #[test]
    fn origin_and_residual() {
        let p = HeunParams::new(-1.0, 0.4, 0.7, 1.3, 1.6, 0.5).unwrap();
        let s = frobenius_series(&p, DEFAULT_ORDER).unwrap();
        let v = eval_local(&s, 0.0).unwrap();
        assert_eq!((v.u, v.u1), (1.0, s.coefficients[1]));
        let v = eval_local(&s, 0.1).unwrap();
        assert!(heun_residual(&p, v.u, v.u1, v.u2, 0.1).unwrap().abs() < 1e-12);
        assert!(eval_local(&s, 1.0).is_err());
    }

    #[test]
    fn gamma_pole() {
        let p = HeunParams::new(2.0, 0.0, 0.7, 1.3, -1.0, 0.5).unwrap();
        assert!(matches!(frobenius_series(&p, 10), Err(HeunError::Pole(_))));
    }
}
