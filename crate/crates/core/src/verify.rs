//! Randomised self-checks over the library's invariants.
//!
//! Every suite draws its instances from a ChaCha8 stream seeded by the
//! caller, so a report is a deterministic function of the seed.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closed_values::value_at_origin;
use crate::error::Result;
use crate::expansions::{
    boundary_flux, generate_coefficients, sum_expansion, sum_expansion_derivative, two_term_coefficients,
    two_term_descending_coefficients, Expansion, ExpansionSpec, DEFAULT_TERMS,
};
use crate::heun::{eval_local, frobenius_series, heun_residual_complex, integrate_ode, HeunParams, DEFAULT_ORDER};
use crate::hypergeom::{gamma_ratio, gauss_2f1, gauss_2f1_derivative, hyper_unit, HyperParams2F1};
use crate::termination::{mirror_equivalence_report, CaseKind, TerminationCase};

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual seen; infinite if a case errored.
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    report: SuiteReport,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            report: SuiteReport {
                name,
                cases: 0,
                failures: 0,
                worst: 0.0,
                tolerance,
            },
        }
    }

    /// Records a residual, or an error as an infinite one.
    fn record(&mut self, r: Result<f64>) {
        let r = r.unwrap_or(f64::INFINITY);
        let r = if r.is_nan() { f64::INFINITY } else { r };
        self.report.cases += 1;
        self.report.worst = self.report.worst.max(r);
        if r > self.report.tolerance {
            self.report.failures += 1;
        }
    }

    fn finish(self) -> SuiteReport {
        self.report
    }
}

fn rel(x: f64, y: f64, scale: f64) -> f64 {
    (x - y).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Uniform draw that stays at least `gap` away from every integer.
fn off_integer(rng: &mut ChaCha8Rng, lo: f64, hi: f64, gap: f64) -> f64 {
    loop {
        let x = rng.gen_range(lo..hi);
        if (x - x.round()).abs() >= gap {
            return x;
        }
    }
}

/// Random parameters for which the ascending expansion converges at small `z`.
pub fn random_convergent_params(rng: &mut ChaCha8Rng) -> HeunParams {
    let a = if rng.gen_bool(0.5) {
        rng.gen_range(-3.0..-0.3)
    } else {
        rng.gen_range(0.2..0.45)
    };
    let alpha = off_integer(rng, -1.5, 2.5, 0.05);
    let beta = off_integer(rng, -1.5, 2.5, 0.05);
    let gamma = off_integer(rng, 0.3, 3.0, 0.05);
    let epsilon = off_integer(rng, -1.5, 2.5, 0.05);
    let q = rng.gen_range(-1.5..1.5);
    HeunParams::new(a, q, alpha, beta, gamma, epsilon).expect("a is away from 0 and 1")
}

/// Random parameters in the two-term slice.
pub fn random_two_term_params(rng: &mut ChaCha8Rng) -> HeunParams {
    let alpha = off_integer(rng, 0.1, 2.5, 0.05);
    let epsilon = off_integer(rng, 0.1, 2.0, 0.05);
    let gamma = off_integer(rng, 0.3, 3.0, 0.05);
    two_term_from(alpha, gamma, epsilon)
}

/// Completes `(α, γ, ε)` to a two-term parameter set.
pub fn two_term_from(alpha: f64, gamma: f64, epsilon: f64) -> HeunParams {
    let beta = 1.0 + epsilon - alpha;
    let delta = 2.0 - gamma;
    let q = 0.5 * alpha * beta + 0.5 * (1.0 - delta) * epsilon;
    HeunParams::new(0.5, q, alpha, beta, gamma, epsilon).expect("a = 1/2")
}

/// `z F′(c) = (c−1)[F(c−1) − F(c)]` and
/// `(z−1) F′(c) = −(α+β−c) F(c) + (α+β−c − αβ/c) F(c+1)`.
pub fn contiguous_suite(seed: u64, cases: usize, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("contiguous", tol);
    for _ in 0..cases {
        let a = rng.gen_range(-2.0..3.0);
        let b = rng.gen_range(-2.0..3.0);
        let c = off_integer(&mut rng, 1.1, 5.0, 0.05);
        let z = rng.gen_range(0.01..0.9);
        t.record((|| {
            let f = |c: f64| gauss_2f1(HyperParams2F1::new(a, b, c, z), 1e-16).map(|v| v.value);
            let d = gauss_2f1_derivative(HyperParams2F1::new(a, b, c, z), 1e-16)?.value;
            let (fm, f0, fp) = (f(c - 1.0)?, f(c)?, f(c + 1.0)?);
            let lhs8 = z * d;
            let rhs8 = (c - 1.0) * (fm - f0);
            let s8 = lhs8.abs().max((c - 1.0) * fm.abs()).max(1.0);
            let dn = a + b - c;
            let lhs9 = (z - 1.0) * d;
            let rhs9 = -dn * f0 + (dn - a * b / c) * fp;
            let s9 = lhs9.abs().max((dn * f0).abs()).max(((dn - a * b / c) * fp).abs()).max(1.0);
            Ok(rel(lhs8, rhs8, s8).max(rel(lhs9, rhs9, s9)))
        })());
    }
    t.finish()
}

/// `F(α, β; α+k; z) = (1−z)^(k−β) F(k, α−β+k; α+k; z)`.
pub fn euler_suite(seed: u64, cases: usize, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("euler", tol);
    for _ in 0..cases {
        let alpha = off_integer(&mut rng, 0.1, 3.0, 0.05);
        let beta = rng.gen_range(-2.0..2.0);
        let k = rng.gen_range(1..=5) as f64;
        let z = rng.gen_range(0.0..0.7);
        t.record((|| {
            let c = alpha + k;
            let lhs = gauss_2f1(HyperParams2F1::new(alpha, beta, c, z), 1e-17)?.value;
            let rhs = (1.0 - z).powf(k - beta) * gauss_2f1(HyperParams2F1::new(k, alpha - beta + k, c, z), 1e-17)?.value;
            Ok(rel(lhs, rhs, lhs.abs().max(rhs.abs())))
        })());
    }
    t.finish()
}

/// `Γ(c)Γ(c−a−b)/(Γ(c−a)Γ(c−b))` against the extrapolated series at `z = 1`.
pub fn gauss_summation_suite(seed: u64, cases: usize, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("gauss-summation", tol);
    let mut done = 0;
    while done < cases {
        let a = off_integer(&mut rng, -1.5, 2.5, 0.05);
        let b = off_integer(&mut rng, -1.5, 2.5, 0.05);
        let c = a + b + rng.gen_range(0.5..3.0);
        if c <= 0.0 && (c - c.round()).abs() < 0.05 {
            continue;
        }
        done += 1;
        t.record((|| {
            let closed = gamma_ratio(&[c, c - a - b], &[c - a, c - b])?;
            let series = hyper_unit(&[a, b], &[c], 1e-13)?.value;
            Ok(rel(closed, series, closed.abs()))
        })());
    }
    t.finish()
}

/// Residual scale `|z(z−1)(z−a)|·(|u″| + |drift·u′| + |pot·u|)` for the flux check.
fn flux_defect(p: &HeunParams, e: &Expansion, z: f64, flux: C64) -> Result<f64> {
    let s: Vec<C64> = (0..3)
        .map(|k| sum_expansion_derivative(p, e, z, k, 1e-12).map(|v| v.value))
        .collect::<Result<_>>()?;
    let r = heun_residual_complex(p, p.q.into(), s[0], s[1], s[2], z)?;
    let lhs = r * (z * (z - 1.0) * (z - p.a));
    Ok((lhs - flux).norm() / flux.norm().max(1.0))
}

/// Frobenius series against ODE integration, and the expansion sum against
/// the inhomogeneous equation `z(z−1)(z−a) L[S] = C` with `C` its boundary flux.
pub fn oracle_agreement_suite(seed: u64, cases: usize, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("oracle-agreement", tol);
    for _ in 0..cases {
        let p = random_convergent_params(&mut rng);
        let z = 0.1 * p.a.abs().min(1.0);
        t.record((|| {
            let series = frobenius_series(&p, DEFAULT_ORDER)?;
            let fro = eval_local(&series, z)?;
            let z0 = 0.1 * z;
            let start = eval_local(&series, z0)?;
            let (ode, _) = integrate_ode(&p, z0, start.u, start.u1, z, 1e-13)?;
            let r1 = rel(fro.u, ode, fro.u.abs());
            let e = generate_coefficients(&p, ExpansionSpec::ascending(&p), DEFAULT_TERMS)?;
            let r2 = flux_defect(&p, &e, z, boundary_flux(&e))?;
            Ok(r1.max(r2))
        })());
    }
    t.finish()
}

/// Recurrence coefficients against the Pochhammer closed forms, and `u(0)`
/// against the coefficient sum.
pub fn two_term_suite(seed: u64, cases: usize, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("two-term", tol);
    for _ in 0..cases {
        let p = random_two_term_params(&mut rng);
        t.record((|| {
            let mut worst = 0.0f64;
            let asc = ExpansionSpec::ascending(&p);
            let closed = two_term_coefficients(&p, 20)?;
            let mut specs = vec![(generate_coefficients(&p, asc, closed.truncation_index)?, closed)];
            let g0 = p.gamma;
            let closed = two_term_descending_coefficients(&p, g0, 20)?;
            let desc = ExpansionSpec::descending_from(&p, g0)?;
            specs.push((generate_coefficients(&p, desc, closed.truncation_index)?, closed));
            for (rec, closed) in &specs {
                for (n, (x, y)) in rec.coefficients.iter().zip(&closed.coefficients).enumerate() {
                    if n % 2 == 1 {
                        // Odd coefficients must be exactly zero in both.
                        if *x != C64::new(0.0, 0.0) || *y != C64::new(0.0, 0.0) {
                            return Ok(f64::INFINITY);
                        }
                        continue;
                    }
                    worst = worst.max((x - y).norm() / y.norm().max(f64::MIN_POSITIVE));
                }
            }
            let e = two_term_coefficients(&p, DEFAULT_TERMS / 2)?;
            let s = sum_expansion(&p, &e, 0.0, 1e-12)?.value.re;
            let u0 = value_at_origin(&p)?;
            // The closed form is checked at the looser coefficient-sum level.
            worst = worst.max(rel(u0, s, u0.abs()) * 1e-4);
            Ok(worst)
        })());
    }
    t.finish()
}

/// Ascending and descending `γ₀ = γ` finite solutions of the ε-case coincide.
pub fn mirror_suite(seed: u64, cases: usize, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("mirror", tol);
    for i in 0..cases {
        let n = 1 + i % 2;
        let a = if rng.gen_bool(0.5) {
            rng.gen_range(-3.0..-0.5)
        } else {
            rng.gen_range(1.5..4.0)
        };
        let alpha = off_integer(&mut rng, 0.2, 2.5, 0.05);
        let beta = off_integer(&mut rng, 0.2, 2.5, 0.05);
        let gamma = off_integer(&mut rng, 1.2, 3.5, 0.05);
        let p = HeunParams::new(a, 0.0, alpha, beta, gamma, -(n as f64)).expect("a is away from 0 and 1");
        let case = TerminationCase { kind: CaseKind::Eps, n };
        t.record(mirror_equivalence_report(&p, case).map(|r| r.max_root_gap.max(r.max_pointwise_gap)));
    }
    t.finish()
}

/// Pinned tolerance and case count of each suite.
pub const SUITES: [(&str, f64, usize); 6] = [
    ("contiguous", 1e-10, 200),
    ("euler", 1e-12, 100),
    ("gauss-summation", 1e-8, 50),
    ("oracle-agreement", 1e-6, 20),
    ("two-term", 1e-12, 20),
    ("mirror", 1e-9, 20),
];

/// Runs every suite. `tol_override`, when given, replaces each pinned
/// tolerance by the larger of the two.
pub fn run_all(seed: u64, tol_override: Option<f64>) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .enumerate()
        .map(|(i, &(name, tol, cases))| {
            let tol = tol_override.map_or(tol, |o| o.max(tol));
            let s = seed.wrapping_add(i as u64);
            match name {
                "contiguous" => contiguous_suite(s, cases, tol),
                "euler" => euler_suite(s, cases, tol),
                "gauss-summation" => gauss_summation_suite(s, cases, tol),
                "oracle-agreement" => oracle_agreement_suite(s, cases, tol),
                "two-term" => two_term_suite(s, cases, tol),
                _ => mirror_suite(s, cases, tol),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_suites_pass() {
        for r in [
            contiguous_suite(7, 40, 1e-10),
            euler_suite(7, 40, 1e-12),
            gauss_summation_suite(7, 20, 1e-8),
            two_term_suite(7, 5, 1e-12),
            mirror_suite(7, 6, 1e-9),
        ] {
            assert!(r.passed(), "{r:?}");
            assert!(r.cases > 0);
        }
    }

    #[test]
    fn oracle_suite_passes() {
        let r = oracle_agreement_suite(3, 4, 1e-6);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn reports_are_deterministic() {
        assert_eq!(euler_suite(11, 10, 1e-12), euler_suite(11, 10, 1e-12));
    }

    #[test]
    fn errors_count_as_failures() {
        let mut t = Tally::new("x", 1.0);
        t.record(Err(crate::HeunError::Domain("boom".into())));
        t.record(Ok(0.5));
        let r = t.finish();
        assert_eq!((r.cases, r.failures), (2, 1));
        assert!(r.worst.is_infinite());
    }
}
