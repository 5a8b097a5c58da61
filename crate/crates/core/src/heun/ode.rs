//! Dormand–Prince 5(4) integration of the Heun equation along the real axis.

use log::trace;

use crate::error::{HeunError, Result};

use super::{eval_local, frobenius_series, HeunParams, DEFAULT_ORDER};

/// Required clearance between the integration interval and a singular point.
const CLEARANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 2_000_000,
        }
    }
}

// Butcher tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rhs(p: &HeunParams, z: f64, y: [f64; 2]) -> [f64; 2] {
    let drift = p.gamma / z + p.delta() / (z - 1.0) + p.epsilon / (z - p.a);
    let pot = (p.alpha * p.beta * z - p.q) / (z * (z - 1.0) * (z - p.a));
    [y[1], -drift * y[1] - pot * y[0]]
}

fn check_interval(p: &HeunParams, z0: f64, z1: f64) -> Result<()> {
    let (lo, hi) = (z0.min(z1), z0.max(z1));
    for s in [0.0, 1.0, p.a] {
        if s > lo - CLEARANCE && s < hi + CLEARANCE {
            return Err(HeunError::Domain(format!(
                "interval [{lo}, {hi}] passes within {CLEARANCE:e} of the singular point {s}"
            )));
        }
    }
    Ok(())
}

/// Integrates from `(z0, u0, u0')` to `z1`; returns `(u(z1), u'(z1))`.
pub fn integrate_ode(p: &HeunParams, z0: f64, u0: f64, u0p: f64, z1: f64, tol: f64) -> Result<(f64, f64)> {
    integrate_with(p, z0, [u0, u0p], z1, OdeOptions::with_tol(tol)).map(|y| (y[0], y[1]))
}

fn integrate_with(p: &HeunParams, z0: f64, y0: [f64; 2], z1: f64, opt: OdeOptions) -> Result<[f64; 2]> {
    check_interval(p, z0, z1)?;
    if z0 == z1 {
        return Ok(y0);
    }
    let dir = (z1 - z0).signum();
    let mut z = z0;
    let mut y = y0;
    let mut h = 1e-3 * (z1 - z0).abs();
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(p, z, y);
    let mut steps = 0usize;

    while (z1 - z) * dir > 0.0 {
        if steps >= opt.max_steps {
            return Err(HeunError::StepFailure {
                z,
                reason: format!("step budget {} exhausted", opt.max_steps),
            });
        }
        h = h.min((z1 - z).abs());
        if h <= 1e-15 * z.abs().max(1e-300) * 16.0 {
            return Err(HeunError::StepFailure {
                z,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let hs = dir * h;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += hs * A[s][j] * kj[0];
                ys[1] += hs * A[s][j] * kj[1];
            }
            k[s] = rhs(p, z + C[s] * hs, ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..2 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += hs * d5;
            let sc = opt.atol + opt.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((hs * (d5 - d4)).abs() / sc);
        }
        steps += 1;
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            z += hs;
            y = y5;
            // First-same-as-last: stage 7 is the derivative at the new point.
            k[0] = k[6];
            let fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            h *= fac.clamp(0.2, 5.0);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    trace!("integrated {z0} -> {z1} in {steps} steps");
    Ok(y)
}

/// Exponent-0 solution at `z1`, seeded from the local series at `z0`.
pub fn integrate_from_origin(p: &HeunParams, z0: f64, z1: f64, tol: f64) -> Result<(f64, f64)> {
    let s = frobenius_series(p, DEFAULT_ORDER)?;
    let v = eval_local(&s, z0)?;
    integrate_ode(p, z0, v.u, v.u1, z1, tol)
}

/// Solves the square system `m x = b` by partial-pivot elimination.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        let pivot = m[col].clone();
        for row in col + 1..n {
            let f = m[row][col] / pivot[col];
            for (v, p) in m[row].iter_mut().zip(&pivot).skip(col) {
                *v -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| m[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Offsets `h` below `z = 1` sampled for the endpoint extrapolation.
pub const NEAR_ONE_STEPS: [f64; 4] = [1e-3, 4.641_588_833_612_779e-4, 2.154_434_690_031_884e-4, 1e-4];

/// Limit `u(1⁻)` of the solution through `(z0, u0, u0')`, for `δ < 1`.
///
/// Near `z = 1` a solution behaves like `U + A h^(1-δ) + B h + C h^(2-δ) + ...`
/// with `h = 1 - z`. The four samples in [`NEAR_ONE_STEPS`] determine those
/// four coefficients; the three-term fit gives the error estimate.
pub fn value_near_one(p: &HeunParams, z0: f64, u0: f64, u0p: f64, tol: f64) -> Result<(f64, f64)> {
    let d = p.delta();
    if d >= 1.0 {
        return Err(HeunError::Domain(format!(
            "u(1) is finite for every solution only when delta < 1 (delta = {d})"
        )));
    }
    if z0 >= 1.0 - NEAR_ONE_STEPS[0] {
        return Err(HeunError::Domain(format!("start point z0 = {z0} too close to 1")));
    }
    let mut exps = vec![0.0, 1.0 - d];
    for e in [1.0, 2.0 - d, 2.0, 3.0 - d] {
        if exps.iter().all(|x: &f64| (x - e).abs() > 0.05) {
            exps.push(e);
        }
    }
    exps.truncate(NEAR_ONE_STEPS.len());

    let opt = OdeOptions::with_tol(tol);
    let mut z = z0;
    let mut y = [u0, u0p];
    let mut samples = Vec::new();
    for &h in &NEAR_ONE_STEPS {
        y = integrate_with(p, z, y, 1.0 - h, opt)?;
        z = 1.0 - h;
        samples.push((h, y[0]));
    }
    let fit = |n: usize| -> Option<f64> {
        let pts = &samples[samples.len() - n..];
        let m = pts
            .iter()
            .map(|&(h, _)| exps[..n].iter().map(|&e| h.powf(e)).collect())
            .collect();
        let b = pts.iter().map(|&(_, u)| u).collect();
        solve(m, b).map(|x| x[0])
    };
    let full = fit(exps.len()).ok_or_else(|| HeunError::Domain("singular endpoint fit".into()))?;
    let reduced = fit(exps.len() - 1).unwrap_or(full);
    Ok((full, (full - reduced).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergeom::{gauss_2f1, HyperParams2F1};
    use approx::assert_relative_eq;

    #[test]
    fn constant_solution() {
        let p = HeunParams::new(2.0, 0.0, 0.0, 1.3, 1.1, 0.4).unwrap();
        let (u, du) = integrate_ode(&p, 0.1, 1.0, 0.0, 0.9, 1e-10).unwrap();
        assert_relative_eq!(u, 1.0, epsilon = 1e-12);
        assert!(du.abs() < 1e-12);
    }

    #[test]
    fn hypergeometric_reduction() {
        let (a, al, be, ga) = (2.0, 0.7, 1.3, 1.6);
        let p = HeunParams::new(a, a * al * be, al, be, ga, 0.0).unwrap();
        let (u, _) = integrate_ode(&p, 1e-4, 1.0 + al * be / ga * 1e-4, al * be / ga, 0.5, 1e-12).unwrap();
        let f = gauss_2f1(HyperParams2F1::new(al, be, ga, 0.5), 1e-15).unwrap().value;
        // The start omits the O(z0^2) term, about 1e-8 relative.
        assert_relative_eq!(u, f, max_relative = 1e-7);
        let (u, _) = integrate_from_origin(&p, 1e-6, 0.5, 1e-12).unwrap();
        assert_relative_eq!(u, f, max_relative = 1e-10);
    }

    #[test]
    fn power_solution() {
        let (a, gamma, eps, delta) = (2.0, 0.6, 0.9, 1.4);
        let alpha = eps + gamma;
        let beta = gamma + delta + eps - 1.0 - alpha;
        let p = HeunParams::new(a, a * gamma * (delta - 1.0), alpha, beta, gamma, eps).unwrap();
        let e = 1.0 - delta;
        let f = |z: f64| (1.0 - z).powf(e);
        let df = |z: f64| -e * (1.0 - z).powf(e - 1.0);
        let (u, du) = integrate_ode(&p, 0.05, f(0.05), df(0.05), 0.6, 1e-11).unwrap();
        assert_relative_eq!(u, f(0.6), max_relative = 1e-9);
        assert_relative_eq!(du, df(0.6), max_relative = 1e-9);
        // Backwards too.
        let (u, _) = integrate_ode(&p, 0.6, f(0.6), df(0.6), 0.05, 1e-11).unwrap();
        assert_relative_eq!(u, f(0.05), max_relative = 1e-9);
    }

    #[test]
    fn endpoint_extrapolation() {
        // ε = 0, q = aαβ reduces to 2F1(α, β; γ; z), whose value at 1 is
        // Gauss' gamma ratio when γ - α - β = 1 - δ > 0.
        let (a, al, be, ga) = (2.0, 0.35, 0.6, 1.7);
        let p = HeunParams::new(a, a * al * be, al, be, ga, 0.0).unwrap();
        assert!(p.delta() < 1.0);
        let z0 = 0.5;
        let f0 = gauss_2f1(HyperParams2F1::new(al, be, ga, z0), 1e-15).unwrap().value;
        let d0 = crate::hypergeom::gauss_2f1_derivative(HyperParams2F1::new(al, be, ga, z0), 1e-15)
            .unwrap()
            .value;
        let (u1, est) = value_near_one(&p, z0, f0, d0, 1e-12).unwrap();
        let exact = crate::hypergeom::gamma_ratio(&[ga, ga - al - be], &[ga - al, ga - be]).unwrap();
        assert_relative_eq!(u1, exact, max_relative = 1e-6);
        assert!(est < 1e-4, "{est}");
    }

    #[test]
    fn interval_contract() {
        let p = HeunParams::new(0.5, 0.1, 0.7, 1.3, 1.1, 0.4).unwrap();
        assert!(matches!(integrate_ode(&p, 0.1, 1.0, 0.0, 0.7, 1e-8), Err(HeunError::Domain(_))));
        assert!(integrate_ode(&p, 0.0, 1.0, 0.0, 0.3, 1e-8).is_err());
        assert!(integrate_ode(&p, 0.6, 1.0, 0.0, 1.0, 1e-8).is_err());
    }
}
