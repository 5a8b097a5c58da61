//! Summation of hypergeometric expansions at a point.
//!
//! Non-terminating coefficient sequences decay only algebraically
//! (`aₙ ~ A n⁻²`, possibly with an alternating `(−1)ⁿ` component when
//! `a = 1/2`). Partial sums are therefore binomially averaged to suppress the
//! alternating part and then Richardson-extrapolated in `1/n, 1/n², ...` from
//! checkpoints `64, 128, ...`.

use log::debug;
use num_complex::Complex64 as C64;

use crate::accel::{Neumaier, Richardson};
use crate::error::{HeunError, Result};
use crate::heun::HeunParams;
use crate::hypergeom::{gauss_2f1, HyperParams2F1, SeriesValue};

use super::{generate_coefficients, Direction, Expansion, ExpansionSpec};

/// Coefficients generated by [`evaluate`]: the last checkpoint plus averaging room.
pub const DEFAULT_TERMS: usize = 16_384 + AVERAGING;
const FIRST_CHECKPOINT: usize = 64;
const AVERAGING: usize = 4;
const LEVELS: usize = 7;
/// Absolute accuracy requested from each basis function.
const BASIS_TOL: f64 = 1e-17;

/// `Σ aₙ ₂F₁(α, β; cₙ; z)`.
pub fn sum_expansion(p: &HeunParams, e: &Expansion, z: f64, tol: f64) -> Result<SeriesValue<C64>> {
    sum_expansion_derivative(p, e, z, 0, tol)
}

/// `Σ aₙ dᵏ/dzᵏ ₂F₁(α, β; cₙ; z)` for `k = order ∈ {0, 1, 2}`.
pub fn sum_expansion_derivative(
    p: &HeunParams,
    e: &Expansion,
    z: f64,
    order: u32,
    tol: f64,
) -> Result<SeriesValue<C64>> {
    if !(0.0..1.0).contains(&z) {
        return Err(HeunError::Domain(format!("z = {z} outside [0, 1)")));
    }
    if order > 2 {
        return Err(HeunError::Domain(format!("derivative order {order} not supported")));
    }
    let coeffs = &e.coefficients;
    let mut sum = Neumaier::new();
    let mut partial = Vec::with_capacity(coeffs.len());
    let mut basis_err = 0.0;
    let mut small_run = 0usize;
    let mut window = Vec::with_capacity(coeffs.len());

    for (n, an) in coeffs.iter().enumerate() {
        let t = if *an == C64::new(0.0, 0.0) {
            C64::new(0.0, 0.0)
        } else {
            let f = basis(p, e.spec.basis_c(n), z, order)?;
            basis_err += an.norm() * f.abs_error_estimate;
            an * f.value
        };
        debug!("n = {n}: a_n = {an}, term = {t}");
        sum.add(t);
        partial.push(sum.value());
        window.push(t.norm());

        if e.terminated {
            continue;
        }
        // Tail of an n^-2 sequence is about n |t_n|; geometric tails are smaller.
        small_run = if t.norm() * (n as f64 + 1.0) < tol { small_run + 1 } else { 0 };
        if small_run >= 3 && n >= 8 {
            let est = 2.0 * (n as f64 + 1.0) * window[n.saturating_sub(2)..].iter().cloned().fold(0.0, f64::max);
            let floor = 16.0 * f64::EPSILON * sum.abs_mass();
            return Ok(SeriesValue::new(sum.value(), est + floor + basis_err, n + 1, tol));
        }
        if n >= 2 * FIRST_CHECKPOINT && n.is_power_of_two() {
            let recent = window_max(&window, n);
            let earlier = window_max(&window, n / 2);
            if earlier > 0.0 && recent > earlier {
                return Err(HeunError::NoConvergence {
                    terms: n + 1,
                    estimate: recent,
                });
            }
        }
    }

    let floor = 16.0 * f64::EPSILON * sum.abs_mass();
    if e.terminated || coeffs.len() < FIRST_CHECKPOINT + AVERAGING + 1 {
        // Finite sum, or too short to extrapolate: report the last term as the
        // truncation error of an unterminated list.
        let trunc = if e.terminated {
            0.0
        } else {
            coeffs.len() as f64 * window_max(&window, coeffs.len() - 1)
        };
        return Ok(SeriesValue::new(sum.value(), trunc + floor + basis_err, coeffs.len(), tol));
    }

    let mut rich = Richardson::new(1.0 + order as f64, 1.0, LEVELS);
    let mut best = sum.value();
    let mut err = f64::INFINITY;
    let mut n = FIRST_CHECKPOINT;
    while n + AVERAGING < partial.len() {
        let (b, d) = rich.push(averaged(&partial, n));
        best = b;
        if rich.len() >= 3 {
            err = d;
        }
        n *= 2;
    }
    if !(best.re.is_finite() && best.im.is_finite()) {
        return Err(HeunError::NoConvergence {
            terms: partial.len(),
            estimate: f64::INFINITY,
        });
    }
    Ok(SeriesValue::new(best, err + floor + basis_err, partial.len(), tol))
}

fn window_max(w: &[f64], n: usize) -> f64 {
    w[n.saturating_sub(3)..=n].iter().cloned().fold(0.0, f64::max)
}

/// Binomial average `2^-m Σ C(m, i) s[n+i]`.
fn averaged(s: &[C64], n: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let mut c = 1.0;
    for i in 0..=AVERAGING {
        acc += s[n + i] * c;
        c = c * (AVERAGING - i) as f64 / (i + 1) as f64;
    }
    acc / 2f64.powi(AVERAGING as i32)
}

/// `dᵏ/dzᵏ ₂F₁(α, β; c; z) = (α)ₖ(β)ₖ/(c)ₖ ₂F₁(α+k, β+k; c+k; z)`.
fn basis(p: &HeunParams, c: f64, z: f64, order: u32) -> Result<SeriesValue> {
    let mut pref = 1.0;
    for i in 0..order {
        let i = i as f64;
        pref *= (p.alpha + i) * (p.beta + i) / (c + i);
    }
    if pref == 0.0 {
        return Ok(SeriesValue {
            value: 0.0,
            abs_error_estimate: 0.0,
            terms_used: 1,
            converged: true,
        });
    }
    let k = order as f64;
    let f = gauss_2f1(HyperParams2F1::new(p.alpha + k, p.beta + k, c + k, z), BASIS_TOL / pref.abs())?;
    Ok(SeriesValue {
        value: pref * f.value,
        abs_error_estimate: pref.abs() * f.abs_error_estimate,
        terms_used: f.terms_used,
        converged: f.converged,
    })
}

/// Generates [`DEFAULT_TERMS`] coefficients and sums them at `z`.
pub fn evaluate(p: &HeunParams, spec: ExpansionSpec, z: f64, tol: f64) -> Result<SeriesValue<C64>> {
    let e = generate_coefficients(p, spec, DEFAULT_TERMS)?;
    sum_expansion(p, &e, z, tol)
}

/// Constant `C` with `z(z−1)(z−a)·L[S] = C` for the sum `S` of a
/// non-terminating expansion, where `L` is the Heun operator.
///
/// Truncating after `a_M` leaves the boundary term of the recurrence, which
/// tends to `∓A` with `A = lim n² aₙ`. A finite expansion has `C = 0`.
pub fn boundary_flux(e: &Expansion) -> C64 {
    if e.terminated {
        return C64::new(0.0, 0.0);
    }
    let scaled: Vec<C64> = e
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, a)| a * (n as f64).powi(2))
        .collect();
    if scaled.len() < FIRST_CHECKPOINT + AVERAGING + 1 {
        return *scaled.last().unwrap();
    }
    let mut rich = Richardson::new(1.0, 1.0, LEVELS);
    let mut best = C64::new(0.0, 0.0);
    let mut n = FIRST_CHECKPOINT;
    while n + AVERAGING < scaled.len() {
        best = rich.push(averaged(&scaled, n)).0;
        n *= 2;
    }
    match e.spec.direction {
        Direction::Ascending => -best,
        Direction::Descending => best,
    }
}
