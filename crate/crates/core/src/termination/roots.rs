//! Roots of real-coefficient polynomials.
//!
//! Weierstrass/Durand–Kerner simultaneous iteration, with Laguerre iteration
//! plus deflation as a fallback, one Newton polish step per root, and
//! conjugate pairing of the result.

use num_complex::Complex64 as C64;

use crate::error::{HeunError, Result};

const MAX_SWEEPS: usize = 500;
const STEP_TOL: f64 = 1e-15;

/// Horner evaluation of `Σ c[k] x^k` and its derivative.
pub fn horner(c: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

/// `Σ |c[k]| |x|^k`, the natural magnitude of a residual `p(x)`.
pub fn residual_scale(c: &[f64], x: C64) -> f64 {
    let r = x.norm();
    c.iter().rev().fold(0.0, |acc, ck| acc * r + ck.abs())
}

/// All roots of `Σ c[k] x^k`, counted with multiplicity.
pub fn poly_roots(c: &[f64]) -> Result<Vec<C64>> {
    let deg = c.iter().rposition(|&x| x != 0.0).ok_or_else(|| {
        HeunError::RootFailure("zero polynomial".into())
    })?;
    let coeffs: Vec<C64> = c[..=deg].iter().map(|&x| C64::from(x)).collect();
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let monic: Vec<C64> = coeffs.iter().map(|&x| x / lead).collect();

    let raw = match durand_kerner(&monic) {
        Some(r) => r,
        None => laguerre_deflation(&monic)?,
    };
    let polished: Vec<C64> = raw
        .into_iter()
        .map(|x| {
            let (p, dp) = horner(&monic, x);
            if dp.norm() > 0.0 {
                let y = x - p / dp;
                // Keep the step only if it helps.
                if horner(&monic, y).0.norm() <= p.norm() {
                    return y;
                }
            }
            x
        })
        .collect();
    Ok(pair_conjugates(&monic, polished))
}

fn durand_kerner(monic: &[C64]) -> Option<Vec<C64>> {
    let deg = monic.len() - 1;
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..deg).map(|k| seed.powu(k as u32) * (0.5 * radius)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, _) = horner(monic, z[i]);
            let mut den = C64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                z[i] += C64::new(1e-8 * radius, 1e-8 * radius);
                moved = f64::INFINITY;
                continue;
            }
            let step = p / den;
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if !moved.is_finite() && z.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return None;
        }
        if moved < STEP_TOL {
            return Some(z);
        }
    }
    // Multiple roots converge only linearly; accept if residuals are small.
    let ok = z.iter().all(|&x| {
        let (p, _) = horner(monic, x);
        let scale: f64 = monic.iter().rev().fold(0.0, |acc, c| acc * x.norm() + c.norm());
        p.norm() <= 1e-10 * scale
    });
    ok.then_some(z)
}

fn laguerre(c: &[C64], mut x: C64) -> Option<C64> {
    let n = (c.len() - 1) as f64;
    for _ in 0..MAX_SWEEPS {
        let (mut p, mut dp, mut d2p) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &ck in c.iter().rev() {
            d2p = d2p * x + dp;
            dp = dp * x + p;
            p = p * x + ck;
        }
        d2p *= 2.0;
        if p.norm() == 0.0 {
            return Some(x);
        }
        let g = dp / p;
        let h = g * g - d2p / p;
        let sq = ((h * n - g * g) * (n - 1.0)).sqrt();
        let den = if (g + sq).norm() >= (g - sq).norm() { g + sq } else { g - sq };
        let step = if den.norm() == 0.0 {
            C64::new(1.0, 1.0) * (1.0 + x.norm())
        } else {
            C64::from(n) / den
        };
        x -= step;
        if step.norm() <= STEP_TOL * (1.0 + x.norm()) {
            return Some(x);
        }
    }
    None
}

fn laguerre_deflation(monic: &[C64]) -> Result<Vec<C64>> {
    let mut c = monic.to_vec();
    let mut roots = Vec::new();
    while c.len() > 1 {
        let r = laguerre(&c, C64::new(0.0, 0.0)).ok_or_else(|| {
            HeunError::RootFailure(format!("no convergence in {MAX_SWEEPS} sweeps"))
        })?;
        // Refine on the undeflated polynomial before deflating.
        let r = laguerre(monic, r).unwrap_or(r);
        roots.push(r);
        // Synthetic division by (x - r).
        let deg = c.len() - 1;
        let mut q = vec![C64::new(0.0, 0.0); deg];
        let mut carry = C64::new(0.0, 0.0);
        for k in (0..deg).rev() {
            carry = c[k + 1] + carry * r;
            q[k] = carry;
        }
        c = q;
    }
    Ok(roots)
}

/// Forces exact conjugate symmetry: near-real roots become real when that
/// does not worsen the residual, and complex roots are paired and averaged.
fn pair_conjugates(monic: &[C64], mut roots: Vec<C64>) -> Vec<C64> {
    for r in roots.iter_mut() {
        let scale = 1.0 + r.norm();
        if r.im.abs() <= 1e-7 * scale {
            let real = C64::new(r.re, 0.0);
            if horner(monic, real).0.norm() <= 10.0 * horner(monic, *r).0.norm() + f64::EPSILON * scale {
                *r = real;
            }
        }
    }
    let mut used = vec![false; roots.len()];
    let mut out = Vec::with_capacity(roots.len());
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = roots[i];
        if r.im == 0.0 {
            out.push(r);
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| !used[j] && roots[j].im * r.im < 0.0)
            .min_by(|&j, &k| {
                (roots[j] - r.conj())
                    .norm()
                    .partial_cmp(&(roots[k] - r.conj()).norm())
                    .unwrap()
            });
        match partner {
            Some(j) => {
                used[j] = true;
                let m = (r + roots[j].conj()) * 0.5;
                let m = if m.im < 0.0 { m.conj() } else { m };
                out.push(m);
                out.push(m.conj());
            }
            None => out.push(r),
        }
    }
    out.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    out
}
