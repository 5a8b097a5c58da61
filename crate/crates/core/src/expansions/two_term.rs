//! The slice `a = 1/2`, `γ + δ = 2`, `q = aαβ + a(1−δ)ε` where `Qₙ ≡ 0`.
//!
//! The recurrence then links only `aₙ` and `aₙ₋₂`, so odd coefficients vanish
//! and the even ones are Pochhammer ratios.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{HeunError, Result};
use crate::heun::HeunParams;
use crate::hypergeom::nonpositive_integer;

use super::{Direction, Expansion, ExpansionSpec, Regime};

const TWO_TERM_TOL: f64 = 1e-12;

/// Which of the three two-term conditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TwoTermFlags {
    pub a_is_half: bool,
    pub gamma_plus_delta_is_two: bool,
    pub q_matches: bool,
}

impl TwoTermFlags {
    pub fn all(&self) -> bool {
        self.a_is_half && self.gamma_plus_delta_is_two && self.q_matches
    }
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= TWO_TERM_TOL * y.abs().max(1.0)
}

pub fn two_term_flags(p: &HeunParams) -> TwoTermFlags {
    let d = p.delta();
    TwoTermFlags {
        a_is_half: close(p.a, 0.5),
        gamma_plus_delta_is_two: close(p.gamma + d, 2.0),
        q_matches: close(p.q, p.a * p.alpha * p.beta + p.a * (1.0 - d) * p.epsilon),
    }
}

pub fn is_two_term(p: &HeunParams) -> bool {
    two_term_flags(p).all()
}

fn require_two_term(p: &HeunParams) -> Result<()> {
    let f = two_term_flags(p);
    if f.all() {
        Ok(())
    } else {
        Err(HeunError::Domain(format!("parameters are not in the two-term regime ({f:?})")))
    }
}

/// Spreads `c₀..c_K` onto even indices and flags termination.
fn spread(spec: ExpansionSpec, c: Vec<f64>, terminated: bool) -> Expansion {
    let mut coefficients = vec![C64::new(0.0, 0.0); 2 * c.len() - 1];
    for (k, ck) in c.iter().enumerate() {
        coefficients[2 * k] = C64::new(*ck, 0.0);
    }
    let truncation_index = coefficients.len() - 1;
    Expansion {
        spec,
        coefficients,
        truncation_index,
        terminated,
    }
}

/// Builds `c₀..c_kmax` with `c_{k+1}/c_k = Π(num + k) / Π(den + k)`.
fn pochhammer_ratio_series(num: &[f64], den: &[f64], kmax: usize) -> Result<(Vec<f64>, bool)> {
    let mut c = vec![1.0];
    for k in 0..kmax {
        let kf = k as f64;
        let top: f64 = num.iter().map(|x| x + kf).product();
        if num.iter().any(|&x| nonpositive_integer(x + kf) == Some(0)) || top == 0.0 {
            return Ok((c, true));
        }
        let bottom: f64 = den.iter().map(|x| x + kf).product();
        if den.iter().any(|&x| nonpositive_integer(x + kf) == Some(0)) {
            return Err(HeunError::Pole(format!(
                "denominator Pochhammer vanishes at k = {}",
                k + 1
            )));
        }
        c.push(c[k] * top / bottom);
    }
    Ok((c, false))
}

/// Coefficients of `₂F₁(α, β; γ+ε+2k; z)`:
/// `(ε/2)ₖ((γ+ε−α)/2)ₖ((γ+ε−β)/2)ₖ / (k! ((γ+ε)/2)ₖ((1+γ+ε)/2)ₖ)`.
pub fn two_term_coefficients(p: &HeunParams, kmax: usize) -> Result<Expansion> {
    require_two_term(p)?;
    let ge = p.gamma + p.epsilon;
    if nonpositive_integer(ge).is_some() {
        return Err(HeunError::Pole(format!("gamma + epsilon = {ge} is a non-positive integer")));
    }
    let num = [p.epsilon / 2.0, (ge - p.alpha) / 2.0, (ge - p.beta) / 2.0];
    let den = [1.0, ge / 2.0, (1.0 + ge) / 2.0];
    let (c, terminated) = pochhammer_ratio_series(&num, &den, kmax)?;
    let spec = ExpansionSpec {
        direction: Direction::Ascending,
        gamma0: ge,
        regime: Regime::TwoTerm,
    };
    Ok(spread(spec, c, terminated))
}

/// Coefficients of `₂F₁(α, β; γ₀−2k; z)`:
/// `((1−γ₀)/2)ₖ((2−γ₀)/2)ₖ((γ+ε−γ₀)/2)ₖ / ((1+(γ−γ₀)/2)ₖ(1+(α−γ₀)/2)ₖ(1+(β−γ₀)/2)ₖ)`.
pub fn two_term_descending_coefficients(p: &HeunParams, gamma0: f64, kmax: usize) -> Result<Expansion> {
    require_two_term(p)?;
    let spec = ExpansionSpec::descending_from(p, gamma0)?;
    let g0 = gamma0;
    let num = [(1.0 - g0) / 2.0, (2.0 - g0) / 2.0, (p.gamma + p.epsilon - g0) / 2.0];
    let den = [
        1.0 + (p.gamma - g0) / 2.0,
        1.0 + (p.alpha - g0) / 2.0,
        1.0 + (p.beta - g0) / 2.0,
    ];
    let (c, terminated) = pochhammer_ratio_series(&num, &den, kmax)?;
    Ok(spread(spec, c, terminated))
}
