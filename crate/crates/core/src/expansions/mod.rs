//! Expansions of Heun solutions in Gauss hypergeometric functions.
//!
//! Ascending: `u = Σ aₙ ₂F₁(α, β; γ+ε+n; z)`.
//! Descending: `u = Σ aₙ ₂F₁(α, β; γ₀−n; z)` with `γ₀ ∈ {γ, α, β}`.
//!
//! In both cases the coefficients obey `Rₙaₙ + Qₙ₋₁aₙ₋₁ + Pₙ₋₂aₙ₋₂ = 0`.

mod sum;
mod two_term;

pub use sum::{boundary_flux, evaluate, sum_expansion, sum_expansion_derivative, DEFAULT_TERMS};
pub use two_term::{
    is_two_term, two_term_coefficients, two_term_descending_coefficients, two_term_flags,
    TwoTermFlags,
};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{HeunError, Result};
use crate::heun::HeunParams;
use crate::hypergeom::{nonpositive_integer, POLE_TOL};

/// Relative threshold below which a coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-14;
/// Tolerance for matching `γ₀` against `γ`, `α` or `β`.
const GAMMA0_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    ThreeTerm,
    TwoTerm,
}

/// Which parameter seeds a descending expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DescendingBase {
    Gamma,
    Alpha,
    Beta,
}

impl DescendingBase {
    pub const ALL: [DescendingBase; 3] = [Self::Gamma, Self::Alpha, Self::Beta];

    pub fn value(self, p: &HeunParams) -> f64 {
        match self {
            Self::Gamma => p.gamma,
            Self::Alpha => p.alpha,
            Self::Beta => p.beta,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gamma => "gamma",
            Self::Alpha => "alpha",
            Self::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionSpec {
    pub direction: Direction,
    pub gamma0: f64,
    pub regime: Regime,
}

impl ExpansionSpec {
    /// Ascending expansion, `γ₀ = γ + ε`.
    pub fn ascending(p: &HeunParams) -> Self {
        Self {
            direction: Direction::Ascending,
            gamma0: p.gamma + p.epsilon,
            regime: regime_of(p),
        }
    }

    /// Descending expansion seeded by `γ`, `α` or `β`.
    pub fn descending(p: &HeunParams, base: DescendingBase) -> Self {
        Self {
            direction: Direction::Descending,
            gamma0: base.value(p),
            regime: regime_of(p),
        }
    }

    /// Descending expansion from a raw `γ₀`, which must match `γ`, `α` or `β`.
    pub fn descending_from(p: &HeunParams, gamma0: f64) -> Result<Self> {
        let s = Self {
            direction: Direction::Descending,
            gamma0,
            regime: regime_of(p),
        };
        s.validate(p)?;
        Ok(s)
    }

    pub fn validate(&self, p: &HeunParams) -> Result<()> {
        match self.direction {
            Direction::Ascending => {
                if self.gamma0 != p.gamma + p.epsilon {
                    return Err(HeunError::Domain(format!(
                        "ascending expansion needs gamma0 = gamma + epsilon, got {}",
                        self.gamma0
                    )));
                }
            }
            Direction::Descending => {
                let ok = DescendingBase::ALL
                    .iter()
                    .any(|b| (b.value(p) - self.gamma0).abs() <= GAMMA0_TOL * self.gamma0.abs().max(1.0));
                if !ok {
                    return Err(HeunError::Domain(format!(
                        "descending gamma0 = {} is none of gamma, alpha, beta",
                        self.gamma0
                    )));
                }
            }
        }
        Ok(())
    }

    /// Lower parameter of the `n`-th basis function.
    #[inline]
    pub fn basis_c(&self, n: usize) -> f64 {
        match self.direction {
            Direction::Ascending => self.gamma0 + n as f64,
            Direction::Descending => self.gamma0 - n as f64,
        }
    }
}

fn regime_of(p: &HeunParams) -> Regime {
    if is_two_term(p) {
        Regime::TwoTerm
    } else {
        Regime::ThreeTerm
    }
}

/// Coefficients of an expansion together with how they were produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    pub spec: ExpansionSpec,
    pub coefficients: Vec<C64>,
    /// Index of the last stored coefficient; for a terminated series, the
    /// last nonzero one.
    pub truncation_index: usize,
    /// All coefficients past `truncation_index` are exactly zero.
    pub terminated: bool,
}

/// `Rₙ`, `Qₙ`, `Pₙ` at one index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceCoeffs {
    pub r: f64,
    pub q: f64,
    pub p: f64,
}

/// `(Rₙ, Qₙ at q = 0, Pₙ)`; the full `Qₙ` is the middle entry minus `q`.
pub(crate) fn ascending_parts(p: &HeunParams, n: usize) -> Result<(f64, f64, f64)> {
    let (a, e, g, d) = (p.a, p.epsilon, p.gamma, p.delta());
    let nf = n as f64;
    let den = nf + e + g;
    if den.abs() <= POLE_TOL {
        return Err(HeunError::Pole(format!(
            "n + epsilon + gamma = 0 at n = {n}: ascending expansion undefined"
        )));
    }
    let r = (1.0 - a) * nf * (e + g + nf - 1.0);
    let q0 = -r + a * (1.0 + nf - d) * (nf + e) + a * p.alpha * p.beta;
    let pp = -a / den * (nf + e) * (den - p.alpha) * (den - p.beta);
    Ok((r, q0, pp))
}

pub(crate) fn descending_parts(p: &HeunParams, gamma0: f64, n: usize) -> Result<(f64, f64, f64)> {
    let (a, e, g) = (p.a, p.epsilon, p.gamma);
    let nf = n as f64;
    let den = gamma0 - nf;
    let r = if den.abs() <= POLE_TOL {
        let num = (g - gamma0 + nf) * (p.alpha - gamma0 + nf) * (p.beta - gamma0 + nf);
        if num != 0.0 {
            return Err(HeunError::Pole(format!(
                "gamma0 - n = 0 at n = {n}: descending expansion undefined"
            )));
        }
        0.0
    } else {
        a / den * (g - gamma0 + nf) * (p.alpha - gamma0 + nf) * (p.beta - gamma0 + nf)
    };
    let pp = (a - 1.0) * (e + g - gamma0 + nf) * (gamma0 - nf - 1.0);
    let q0 = -pp + a * (g - gamma0 + nf) * (p.alpha + p.beta - gamma0 + nf) + a * p.alpha * p.beta;
    Ok((r, q0, pp))
}

pub fn recurrence_ascending(p: &HeunParams, n: usize) -> Result<RecurrenceCoeffs> {
    if nonpositive_integer(p.gamma + p.epsilon).is_some() {
        return Err(HeunError::Pole(format!(
            "gamma + epsilon = {} is a non-positive integer",
            p.gamma + p.epsilon
        )));
    }
    let (r, q0, pp) = ascending_parts(p, n)?;
    Ok(RecurrenceCoeffs { r, q: q0 - p.q, p: pp })
}

pub fn recurrence_descending(p: &HeunParams, gamma0: f64, n: usize) -> Result<RecurrenceCoeffs> {
    ExpansionSpec::descending_from(p, gamma0)?;
    let (r, q0, pp) = descending_parts(p, gamma0, n)?;
    Ok(RecurrenceCoeffs { r, q: q0 - p.q, p: pp })
}

pub(crate) fn parts(p: &HeunParams, spec: &ExpansionSpec, n: usize) -> Result<(f64, f64, f64)> {
    match spec.direction {
        Direction::Ascending => ascending_parts(p, n),
        Direction::Descending => descending_parts(p, spec.gamma0, n),
    }
}

fn check_applicable(p: &HeunParams, spec: &ExpansionSpec) -> Result<()> {
    spec.validate(p)?;
    if p.alpha * p.beta == 0.0 {
        return Err(HeunError::Domain(
            "expansion inapplicable: alpha*beta = 0".into(),
        ));
    }
    if spec.direction == Direction::Ascending && nonpositive_integer(spec.gamma0).is_some() {
        return Err(HeunError::Pole(format!(
            "gamma + epsilon = {} is a non-positive integer",
            spec.gamma0
        )));
    }
    Ok(())
}

/// Raw recurrence output `a₀..a_M` for a complex accessory parameter, with no
/// zero snapping or early termination.
pub(crate) fn raw_coefficients(p: &HeunParams, q: C64, spec: &ExpansionSpec, m: usize) -> Result<Vec<C64>> {
    check_applicable(p, spec)?;
    let two_term = spec.regime == Regime::TwoTerm && q == C64::from(p.q);
    let mut a = Vec::with_capacity(m + 1);
    a.push(C64::new(1.0, 0.0));
    let mut prev = (0.0, C64::new(0.0, 0.0), 0.0);
    let mut cur = parts(p, spec, 0)?;
    for n in 1..=m {
        let next = parts(p, spec, n)?;
        let qn1 = if two_term {
            C64::new(0.0, 0.0)
        } else {
            C64::from(cur.1) - q
        };
        let mut num = qn1 * a[n - 1];
        if n >= 2 {
            num += a[n - 2] * prev.2;
        }
        let rn = next.0;
        let an = if rn == 0.0 {
            if num.norm() > 0.0 {
                return Err(HeunError::Pole(format!(
                    "R_{n} = 0 with nonzero right-hand side: expansion inapplicable"
                )));
            }
            C64::new(0.0, 0.0)
        } else {
            -num / rn
        };
        a.push(an);
        prev = (cur.0, C64::from(cur.1), cur.2);
        cur = next;
    }
    Ok(a)
}

/// Coefficients `a₀..a_M` of the expansion for the real `q` in `p`.
pub fn generate_coefficients(p: &HeunParams, spec: ExpansionSpec, m: usize) -> Result<Expansion> {
    generate_coefficients_complex(p, C64::from(p.q), spec, m)
}

/// As [`generate_coefficients`] with a complex accessory parameter.
///
/// Coefficients below `ZERO_TOL · max|aₖ|` are set to zero; two consecutive
/// zeros end the series.
pub fn generate_coefficients_complex(
    p: &HeunParams,
    q: C64,
    spec: ExpansionSpec,
    m: usize,
) -> Result<Expansion> {
    check_applicable(p, &spec)?;
    // Under the two-term conditions Qₙ vanishes identically; skipping it keeps
    // the odd coefficients exactly zero instead of round-off sized.
    let two_term = spec.regime == Regime::TwoTerm && q == C64::from(p.q);
    let mut a: Vec<C64> = Vec::with_capacity(m + 1);
    a.push(C64::new(1.0, 0.0));
    let mut scale = 1.0f64;
    let mut prev = (0.0, 0.0, 0.0);
    let mut cur = parts(p, &spec, 0)?;
    let mut zeros = 0;
    for n in 1..=m {
        let next = parts(p, &spec, n)?;
        let qn1 = if two_term {
            C64::new(0.0, 0.0)
        } else {
            C64::from(cur.1) - q
        };
        let mut num = qn1 * a[n - 1];
        if n >= 2 {
            num += a[n - 2] * prev.2;
        }
        let rn = next.0;
        let size = 1.0 + (n * n) as f64;
        let mut an = if rn.abs() <= POLE_TOL * size {
            if num.norm() > ZERO_TOL * scale * size {
                return Err(HeunError::Pole(format!(
                    "R_{n} = 0 with nonzero right-hand side: expansion inapplicable"
                )));
            }
            C64::new(0.0, 0.0)
        } else {
            -num / rn
        };
        if !(an.re.is_finite() && an.im.is_finite()) {
            return Err(HeunError::NoConvergence {
                terms: n,
                estimate: f64::INFINITY,
            });
        }
        if an.norm() <= ZERO_TOL * scale {
            an = C64::new(0.0, 0.0);
            zeros += 1;
        } else {
            zeros = 0;
            scale = scale.max(an.norm());
        }
        a.push(an);
        if zeros >= 2 {
            a.truncate(n - 1);
            let truncation_index = a.len() - 1;
            return Ok(Expansion {
                spec,
                coefficients: a,
                truncation_index,
                terminated: true,
            });
        }
        prev = cur;
        cur = next;
    }
    Ok(Expansion {
        spec,
        coefficients: a,
        truncation_index: m,
        terminated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn fixture() -> HeunParams {
        HeunParams::new(0.5, 0.475, 0.5, 1.5, 1.2, 1.0).unwrap()
    }

    #[test]
    fn ascending_recurrence_examples() {
        let p = HeunParams::new(2.0, 0.3, 0.7, 1.3, 1.1, 0.4).unwrap();
        assert_eq!(recurrence_ascending(&p, 0).unwrap().r, 0.0);
        let (a, al, be) = (2.0, 0.7, 1.3);
        let p = HeunParams::new(a, a * al * be, al, be, 1.1, 0.0).unwrap();
        assert!(recurrence_ascending(&p, 0).unwrap().q.abs() < 1e-15);
        let f = fixture();
        for n in 0..=10 {
            assert!(recurrence_ascending(&f, n).unwrap().q.abs() < 1e-13, "n = {n}");
        }
        let rc = recurrence_ascending(&f, 2).unwrap();
        assert_relative_eq!(rc.r, 3.2, epsilon = 1e-14);
        let p0 = recurrence_ascending(&f, 0).unwrap().p;
        assert_relative_eq!(p0, -0.5 / 2.2 * 1.7 * 0.7, epsilon = 1e-15);
    }

    #[test]
    fn descending_recurrence_examples() {
        let p = HeunParams::new(2.0, 0.3, 0.7, 1.3, 1.1, 0.4).unwrap();
        assert_eq!(recurrence_descending(&p, p.gamma, 0).unwrap().r, 0.0);
        assert_eq!(recurrence_descending(&p, p.alpha, 0).unwrap().r, 0.0);
        assert!(recurrence_descending(&p, 0.123, 0).is_err());
        // ε = −N with γ₀ = γ: P_N = 0.
        let p = HeunParams::new(2.0, 0.3, 0.7, 1.3, 1.1, -2.0).unwrap();
        assert_eq!(recurrence_descending(&p, p.gamma, 2).unwrap().p, 0.0);
    }

    #[test]
    fn generated_recurrence_holds() {
        let p = HeunParams::new(-1.0, 0.37, 0.7, 1.3, 1.1, 0.4).unwrap();
        for spec in [
            ExpansionSpec::ascending(&p),
            ExpansionSpec::descending(&p, DescendingBase::Gamma),
            ExpansionSpec::descending(&p, DescendingBase::Beta),
        ] {
            let e = generate_coefficients(&p, spec, 40).unwrap();
            assert_eq!(e.coefficients[0], C64::new(1.0, 0.0));
            let a = &e.coefficients;
            for n in 2..=40 {
                let rn = parts(&p, &spec, n).unwrap().0;
                let q = parts(&p, &spec, n - 1).unwrap().1 - p.q;
                let pp = parts(&p, &spec, n - 2).unwrap().2;
                let res = a[n] * rn + a[n - 1] * q + a[n - 2] * pp;
                let scale = (a[n] * rn).norm() + (a[n - 1] * q).norm() + (a[n - 2] * pp).norm();
                assert!(res.norm() <= 1e-13 * scale, "n = {n}");
            }
        }
    }

    #[test]
    fn hypergeometric_degeneration_terminates() {
        let (a, al, be) = (2.0, 0.7, 1.3);
        let p = HeunParams::new(a, a * al * be, al, be, 1.1, 0.0).unwrap();
        let e = generate_coefficients(&p, ExpansionSpec::ascending(&p), 10).unwrap();
        assert!(e.terminated);
        assert_eq!(e.truncation_index, 0);
        assert_eq!(e.coefficients, vec![C64::new(1.0, 0.0)]);
    }

    #[test]
    fn two_term_fixture_even_structure() {
        let f = fixture();
        let spec = ExpansionSpec::ascending(&f);
        assert_eq!(spec.regime, Regime::TwoTerm);
        let e = generate_coefficients(&f, spec, 6).unwrap();
        for k in [1, 3, 5] {
            assert_eq!(e.coefficients[k], C64::new(0.0, 0.0));
        }
        assert_relative_eq!(e.coefficients[2].re, 0.0845170, epsilon = 1e-7);
        let p0 = -(0.5 / 2.2) * 1.7 * 0.7;
        assert_relative_eq!(e.coefficients[2].re, -p0 / 3.2, epsilon = 1e-15);
    }

    #[test]
    fn inapplicable_cases() {
        let p = HeunParams::new(2.0, 0.3, 0.0, 1.3, 1.1, 0.4).unwrap();
        assert!(matches!(
            generate_coefficients(&p, ExpansionSpec::ascending(&p), 5),
            Err(HeunError::Domain(_))
        ));
        let p = HeunParams::new(2.0, 0.3, 0.7, 1.3, 1.0, -3.0).unwrap();
        assert!(matches!(
            generate_coefficients(&p, ExpansionSpec::ascending(&p), 5),
            Err(HeunError::Pole(_))
        ));
    }
}
