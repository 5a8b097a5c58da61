//! Terminating expansions: case detection, the accessory-parameter polynomial
//! and the resulting finite-sum solutions.

mod roots;

pub use roots::{horner, poly_roots, residual_scale};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{HeunError, Result};
use crate::expansions::{
    parts, raw_coefficients, sum_expansion, Direction, Expansion, ExpansionSpec, Regime,
};
use crate::heun::HeunParams;

/// Default absolute tolerance for recognising `−N`.
pub const INTEGER_TOL: f64 = 1e-9;
/// Relative size below which `a_{N+1}`, `a_{N+2}` count as vanished.
const VANISH_TOL: f64 = 1e-9;
const MIRROR_TOL: f64 = 1e-9;
const MIRROR_ANCHOR: f64 = 0.2;
const MIRROR_POINTS: [f64; 3] = [0.1, 0.3, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseKind {
    /// `ε = −N`
    Eps,
    /// `ε + γ − α = −N`
    Alpha,
    /// `ε + γ − β = −N`
    Beta,
}

impl CaseKind {
    pub const ALL: [CaseKind; 3] = [Self::Eps, Self::Alpha, Self::Beta];

    /// The quantity that must equal `−N`.
    pub fn quantity(self, p: &HeunParams) -> f64 {
        match self {
            Self::Eps => p.epsilon,
            Self::Alpha => p.epsilon + p.gamma - p.alpha,
            Self::Beta => p.epsilon + p.gamma - p.beta,
        }
    }

    /// `γ₀` of the descending expansion that terminates in the same case.
    pub fn descending_gamma0(self, p: &HeunParams) -> f64 {
        match self {
            Self::Eps => p.gamma,
            Self::Alpha => p.alpha,
            Self::Beta => p.beta,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Eps => "eps",
            Self::Alpha => "alpha",
            Self::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TerminationCase {
    pub kind: CaseKind,
    pub n: usize,
}

/// Accessory-parameter roots of one termination case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QRootSet {
    pub case: TerminationCase,
    pub direction: Direction,
    /// `D_N(q) = Σ coefficients[k] q^k`.
    pub coefficients: Vec<f64>,
    pub roots: Vec<C64>,
    /// `|D_N(q)|` at each root.
    pub residuals: Vec<f64>,
    /// `|D_N(q)| / Σ |c_k| |q|^k` at each root.
    pub relative_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSolution {
    /// Parameters with `q` set to the real part of the chosen root.
    pub params: HeunParams,
    pub q: C64,
    pub expansion: Expansion,
    pub case: TerminationCase,
}

impl FiniteSolution {
    pub fn eval(&self, z: f64) -> Result<C64> {
        sum_expansion(&self.params, &self.expansion, z, 1e-14).map(|v| v.value)
    }
}

pub fn detect_termination_cases(p: &HeunParams) -> Vec<TerminationCase> {
    detect_termination_cases_with(p, INTEGER_TOL)
}

/// As [`detect_termination_cases`] with an explicit integer tolerance.
pub fn detect_termination_cases_with(p: &HeunParams, tol: f64) -> Vec<TerminationCase> {
    CaseKind::ALL
        .iter()
        .filter_map(|&kind| {
            let x = kind.quantity(p);
            let r = x.round();
            (r <= 0.0 && (x - r).abs() <= tol).then(|| TerminationCase {
                kind,
                n: (-r) as usize,
            })
        })
        .collect()
}

fn spec_for(p: &HeunParams, case: TerminationCase, direction: Direction) -> ExpansionSpec {
    let mut spec = match direction {
        Direction::Ascending => ExpansionSpec::ascending(p),
        Direction::Descending => ExpansionSpec {
            direction,
            gamma0: case.kind.descending_gamma0(p),
            regime: Regime::ThreeTerm,
        },
    };
    // The determinant path always keeps Qₙ.
    spec.regime = Regime::ThreeTerm;
    spec
}

fn check_case(p: &HeunParams, case: TerminationCase) -> Result<()> {
    let x = case.kind.quantity(p);
    if (x + case.n as f64).abs() > INTEGER_TOL {
        return Err(HeunError::Domain(format!(
            "{} case needs {} = -{}, got {x}",
            case.kind.name(),
            match case.kind {
                CaseKind::Eps => "epsilon",
                CaseKind::Alpha => "epsilon + gamma - alpha",
                CaseKind::Beta => "epsilon + gamma - beta",
            },
            case.n
        )));
    }
    Ok(())
}

/// Coefficients in `q` of `D_N` for either expansion family.
pub fn determinant_polynomial(p: &HeunParams, case: TerminationCase, direction: Direction) -> Result<Vec<f64>> {
    check_case(p, case)?;
    let spec = spec_for(p, case, direction);
    let n = case.n;
    // D_{-1} = 1, D_0 = Q_0(q).
    let mut d_prev = vec![1.0];
    let (_, q0, _) = parts(p, &spec, 0)?;
    let mut d_cur = vec![q0, -1.0];
    for k in 1..=n {
        let (rk, qk, _) = parts(p, &spec, k)?;
        let (_, _, pk1) = parts(p, &spec, k - 1)?;
        let mut next = vec![0.0; d_cur.len() + 1];
        for (i, &c) in d_cur.iter().enumerate() {
            next[i] += qk * c;
            next[i + 1] -= c;
        }
        for (i, &c) in d_prev.iter().enumerate() {
            next[i] -= pk1 * rk * c;
        }
        d_prev = d_cur;
        d_cur = next;
    }
    Ok(d_cur)
}

/// `D_N(q)` from the tridiagonal recurrence with ascending coefficients.
pub fn q_determinant(p: &HeunParams, case: TerminationCase, q: C64) -> Result<C64> {
    q_determinant_directed(p, case, q, Direction::Ascending)
}

pub fn q_determinant_directed(p: &HeunParams, case: TerminationCase, q: C64, direction: Direction) -> Result<C64> {
    check_case(p, case)?;
    let spec = spec_for(p, case, direction);
    let mut d_prev = C64::new(1.0, 0.0);
    let mut d_cur = C64::from(parts(p, &spec, 0)?.1) - q;
    for k in 1..=case.n {
        let (rk, qk, _) = parts(p, &spec, k)?;
        let pk1 = parts(p, &spec, k - 1)?.2;
        let next = (C64::from(qk) - q) * d_cur - d_prev * (pk1 * rk);
        d_prev = d_cur;
        d_cur = next;
    }
    Ok(d_cur)
}

pub fn q_roots(p: &HeunParams, case: TerminationCase) -> Result<QRootSet> {
    q_roots_directed(p, case, Direction::Ascending)
}

pub fn q_roots_directed(p: &HeunParams, case: TerminationCase, direction: Direction) -> Result<QRootSet> {
    let coefficients = determinant_polynomial(p, case, direction)?;
    let roots = poly_roots(&coefficients)?;
    if roots.len() != case.n + 1 {
        return Err(HeunError::RootFailure(format!(
            "expected {} roots, found {}",
            case.n + 1,
            roots.len()
        )));
    }
    let cc: Vec<C64> = coefficients.iter().map(|&c| C64::from(c)).collect();
    let residuals: Vec<f64> = roots.iter().map(|&r| horner(&cc, r).0.norm()).collect();
    let relative_residuals = roots
        .iter()
        .zip(&residuals)
        .map(|(&r, &res)| res / residual_scale(&coefficients, r))
        .collect();
    Ok(QRootSet {
        case,
        direction,
        coefficients,
        roots,
        residuals,
        relative_residuals,
    })
}

pub fn build_finite_solution(p: &HeunParams, case: TerminationCase, root_index: usize) -> Result<FiniteSolution> {
    build_finite_solution_directed(p, case, root_index, Direction::Ascending)
}

/// Finite solution for the `root_index`-th root of the chosen family's
/// determinant.
pub fn build_finite_solution_directed(
    p: &HeunParams,
    case: TerminationCase,
    root_index: usize,
    direction: Direction,
) -> Result<FiniteSolution> {
    let set = q_roots_directed(p, case, direction)?;
    let q = *set.roots.get(root_index).ok_or_else(|| {
        HeunError::Domain(format!("root index {root_index} out of range 0..{}", set.roots.len()))
    })?;
    finite_solution_at(p, case, q, direction)
}

/// Finite solution for a given (possibly complex) root `q`.
pub fn finite_solution_at(p: &HeunParams, case: TerminationCase, q: C64, direction: Direction) -> Result<FiniteSolution> {
    let n = case.n;
    let params = p.with_q(q.re);
    let spec = spec_for(&params, case, direction);
    let a = raw_coefficients(&params, q, &spec, n + 2)?;
    let scale = a[..=n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    for k in [n + 1, n + 2] {
        if a[k].norm() > VANISH_TOL * scale {
            return Err(HeunError::TerminationFailure(format!(
                "a_{k} = {} does not vanish (scale {scale:e}); q = {q} is not a root",
                a[k]
            )));
        }
    }
    let mut coefficients = a;
    coefficients.truncate(n + 1);
    Ok(FiniteSolution {
        params,
        q,
        expansion: Expansion {
            spec,
            coefficients,
            truncation_index: n,
            terminated: true,
        },
        case,
    })
}

/// `u = (1−z)^exponent · Σ poly[k] z^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiPolynomial {
    pub exponent: f64,
    pub poly: Vec<C64>,
}

impl QuasiPolynomial {
    pub fn eval(&self, z: f64) -> C64 {
        horner(&self.poly, C64::from(z)).0 * (1.0 - z).powf(self.exponent)
    }
}

fn near_int(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= INTEGER_TOL).then_some(r as i64)
}

/// Rewrites an `α`/`β` case finite solution as `(1−z)^(1−δ)` times a polynomial.
///
/// Each basis function `₂F₁(α, β; α+k; z)` with integer `k ≤ 0` is
/// `(1−z)^(k−β) ₂F₁(k, α−β+k; α+k; z)`, a polynomial of degree `−k`, and
/// `k − β − (1−δ)` is a non-negative integer `j` contributing `(1−z)^j`.
pub fn quasi_polynomial_form(sol: &FiniteSolution) -> Result<QuasiPolynomial> {
    let p = &sol.params;
    let (x, y) = match sol.case.kind {
        CaseKind::Eps => {
            return Err(HeunError::Domain(
                "eps-case finite sums do not reduce to quasi-polynomials".into(),
            ))
        }
        CaseKind::Alpha => (p.alpha, p.beta),
        CaseKind::Beta => (p.beta, p.alpha),
    };
    let exponent = 1.0 - p.delta();
    let mut poly = vec![C64::new(0.0, 0.0); sol.case.n + 1];
    for (n, &an) in sol.expansion.coefficients.iter().enumerate() {
        let c = sol.expansion.spec.basis_c(n);
        let k = near_int(c - x)
            .filter(|&k| k <= 0)
            .ok_or_else(|| HeunError::Domain(format!("basis c = {c} is not {x} minus an integer")))?;
        let j = near_int(k as f64 - y - exponent)
            .filter(|&j| j >= 0)
            .ok_or_else(|| HeunError::Domain("basis exponent mismatch".into()))? as usize;
        // ₂F₁(k, x−y+k; x+k; z) as a polynomial.
        let m = (-k) as usize;
        let (ua, ub, lc) = (k as f64, x - y + k as f64, x + k as f64);
        let mut f = vec![0.0; m + 1];
        let mut t = 1.0;
        f[0] = 1.0;
        for i in 0..m {
            let fi = i as f64;
            t *= (ua + fi) * (ub + fi) / ((lc + fi) * (fi + 1.0));
            f[i + 1] = t;
        }
        // Multiply by (1−z)^j.
        for _ in 0..j {
            let mut g = vec![0.0; f.len() + 1];
            for (i, &v) in f.iter().enumerate() {
                g[i] += v;
                g[i + 1] -= v;
            }
            f = g;
        }
        if poly.len() < f.len() {
            poly.resize(f.len(), C64::new(0.0, 0.0));
        }
        for (i, &v) in f.iter().enumerate() {
            poly[i] += an * v;
        }
    }
    while poly.len() > 1 && poly.last().is_some_and(|c| c.norm() == 0.0) {
        poly.pop();
    }
    Ok(QuasiPolynomial { exponent, poly })
}

/// Outcome of comparing the ascending and descending finite solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirrorReport {
    pub equivalent: bool,
    pub max_root_gap: f64,
    pub max_pointwise_gap: f64,
}

pub fn mirror_equivalence_check(p: &HeunParams, case: TerminationCase) -> Result<bool> {
    mirror_equivalence_report(p, case).map(|r| r.equivalent)
}

/// Roots are matched greedily to their nearest partner; each pair of
/// solutions is normalised to 1 at `z = 0.2` before comparison.
pub fn mirror_equivalence_report(p: &HeunParams, case: TerminationCase) -> Result<MirrorReport> {
    let asc = q_roots_directed(p, case, Direction::Ascending)?;
    let desc = q_roots_directed(p, case, Direction::Descending)?;
    let mut free: Vec<C64> = desc.roots.clone();
    let mut max_root_gap = 0.0f64;
    let mut max_pointwise_gap = 0.0f64;
    for &qa in &asc.roots {
        let (idx, _) = free
            .iter()
            .enumerate()
            .map(|(i, &qd)| (i, (qd - qa).norm()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .ok_or_else(|| HeunError::RootFailure("root count mismatch".into()))?;
        let qd = free.swap_remove(idx);
        max_root_gap = max_root_gap.max((qd - qa).norm() / qa.norm().max(1.0));

        let sa = finite_solution_at(p, case, qa, Direction::Ascending)?;
        let sd = finite_solution_at(p, case, qd, Direction::Descending)?;
        let (na, nd) = (sa.eval(MIRROR_ANCHOR)?, sd.eval(MIRROR_ANCHOR)?);
        for z in MIRROR_POINTS {
            let ua = sa.eval(z)? / na;
            let ud = sd.eval(z)? / nd;
            max_pointwise_gap = max_pointwise_gap.max((ua - ud).norm() / ua.norm().max(1.0));
        }
    }
    Ok(MirrorReport {
        equivalent: max_root_gap <= MIRROR_TOL && max_pointwise_gap <= MIRROR_TOL,
        max_root_gap,
        max_pointwise_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heun::heun_residual_complex;
    use crate::hypergeom::{gauss_2f1, HyperParams2F1};
    use crate::expansions::sum_expansion_derivative;
    use approx::assert_relative_eq;

    /// α-case N = 0 fixture: a = 2, γ = 0.6, ε = 0.9, δ = 1.4.
    fn alpha0() -> HeunParams {
        HeunParams::new(2.0, 0.0, 1.5, 0.4, 0.6, 0.9).unwrap()
    }

    fn eps1() -> HeunParams {
        HeunParams::new(2.0, 0.0, 0.7, 1.9, 1.35, -1.0).unwrap()
    }

    #[test]
    fn detection() {
        let p = HeunParams::new(2.0, 0.0, 0.7 + 2f64.sqrt(), 1.3, 3f64.sqrt(), -2.0).unwrap();
        assert_eq!(
            detect_termination_cases(&p),
            vec![TerminationCase { kind: CaseKind::Eps, n: 2 }]
        );
        let f = alpha0();
        assert_eq!(
            detect_termination_cases(&f),
            vec![TerminationCase { kind: CaseKind::Alpha, n: 0 }]
        );
        let g = HeunParams::new(2.0, 0.0, 2f64.sqrt(), 0.3, 5f64.sqrt(), 7f64.sqrt()).unwrap();
        assert!(detect_termination_cases(&g).is_empty());
    }

    #[test]
    fn alpha_case_zero_root() {
        let f = alpha0();
        assert_relative_eq!(f.delta(), 1.4, epsilon = 1e-15);
        let case = TerminationCase { kind: CaseKind::Alpha, n: 0 };
        let r = q_roots(&f, case).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_relative_eq!(r.roots[0].re, 0.48, epsilon = 1e-14);
        assert!(r.residuals[0] < 1e-12);
        let sol = build_finite_solution(&f, case, 0).unwrap();
        for i in 1..=9 {
            let z = i as f64 / 10.0;
            let u = sol.eval(z).unwrap();
            assert_relative_eq!(u.re, (1.0 - z).powf(1.0 - f.delta()), max_relative = 1e-12);
        }
        let qp = quasi_polynomial_form(&sol).unwrap();
        assert_relative_eq!(qp.exponent, -0.4, epsilon = 1e-15);
        assert_eq!(qp.poly.len(), 1);
        assert_relative_eq!(qp.poly[0].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trivial_eps_zero_root() {
        let p = HeunParams::new(2.0, 0.0, 0.7, 1.3, 1.1, 0.0).unwrap();
        let case = TerminationCase { kind: CaseKind::Eps, n: 0 };
        let r = q_roots(&p, case).unwrap();
        assert_relative_eq!(r.roots[0].re, 2.0 * 0.7 * 1.3, epsilon = 1e-14);
        let sol = build_finite_solution(&p, case, 0).unwrap();
        let f = gauss_2f1(HyperParams2F1::new(0.7, 1.3, 1.1, 0.4), 1e-15).unwrap().value;
        assert_relative_eq!(sol.eval(0.4).unwrap().re, f, epsilon = 1e-14);
        assert!(quasi_polynomial_form(&sol).is_err());
    }

    #[test]
    fn determinant_degree_and_leading_sign() {
        let p = eps1();
        for n in 0..5 {
            let mut q = p;
            q.epsilon = -(n as f64);
            let case = TerminationCase { kind: CaseKind::Eps, n };
            let c = determinant_polynomial(&q, case, Direction::Ascending).unwrap();
            assert_eq!(c.len(), n + 2);
            assert_eq!(c[n + 1], if n % 2 == 0 { -1.0 } else { 1.0 });
            for x in [-1.3, 0.2, 2.7] {
                let via_rec = q_determinant(&q, case, C64::from(x)).unwrap();
                let cc: Vec<C64> = c.iter().map(|&v| C64::from(v)).collect();
                let via_poly = horner(&cc, C64::from(x)).0;
                assert!((via_rec - via_poly).norm() < 1e-10 * via_poly.norm().max(1.0));
            }
        }
    }

    #[test]
    fn eps_one_quadratic_and_coefficient() {
        let p = eps1();
        let (a, al, be, ga, d) = (p.a, p.alpha, p.beta, p.gamma, p.delta());
        let case = TerminationCase { kind: CaseKind::Eps, n: 1 };
        let r = q_roots(&p, case).unwrap();
        for (i, &q) in r.roots.iter().enumerate() {
            let quad = (q - a * al * be + a * (1.0 - d)) * (q - a * al * be + (a - 1.0) * (1.0 - ga))
                - a * (1.0 - a) * (1.0 + al - ga) * (1.0 + be - ga);
            assert!(quad.norm() < 1e-10, "{quad}");
            let sol = build_finite_solution(&p, case, i).unwrap();
            let a1 = (q - a * al * be + a * (1.0 - d)) / ((1.0 - a) * (ga - 1.0));
            assert!((sol.expansion.coefficients[1] - a1).norm() < 1e-10);
            for z in [0.1, 0.25, 0.4] {
                let e = &sol.expansion;
                let s: Vec<C64> = (0..3)
                    .map(|k| sum_expansion_derivative(&sol.params, e, z, k, 1e-14).unwrap().value)
                    .collect();
                let res = heun_residual_complex(&sol.params, q, s[0], s[1], s[2], z).unwrap();
                assert!(res.norm() < 1e-10, "{res}");
            }
        }
    }

    #[test]
    fn bad_root_is_rejected() {
        let p = eps1();
        let case = TerminationCase { kind: CaseKind::Eps, n: 1 };
        assert!(matches!(
            finite_solution_at(&p, case, C64::from(0.123), Direction::Ascending),
            Err(HeunError::TerminationFailure(_))
        ));
    }

    #[test]
    fn mirror_equivalence() {
        for n in 0..=2 {
            let mut p = eps1();
            p.epsilon = -(n as f64);
            let case = TerminationCase { kind: CaseKind::Eps, n };
            let rep = mirror_equivalence_report(&p, case).unwrap();
            assert!(rep.equivalent, "N = {n}: {rep:?}");
        }
    }

    #[test]
    fn alpha_case_one_quasi_polynomial() {
        let (a, ga, eps, be) = (2.0, 0.6, 0.9, 0.4);
        let al = eps + ga + 1.0;
        let p = HeunParams::new(a, 0.0, al, be, ga, eps).unwrap();
        let case = TerminationCase { kind: CaseKind::Alpha, n: 1 };
        let d = p.delta();
        let r = q_roots(&p, case).unwrap();
        for (i, &q) in r.roots.iter().enumerate() {
            let sol = build_finite_solution(&p, case, i).unwrap();
            let qp = quasi_polynomial_form(&sol).unwrap();
            for k in 0..=9 {
                let z = k as f64 / 10.0;
                let u = sol.eval(z).unwrap();
                assert!((qp.eval(z) - u).norm() < 1e-10 * u.norm().max(1.0));
                let closed = (1.0 - z).powf(1.0 - d)
                    * (C64::from(1.0 - (al + 1.0 - d) / (al - 1.0) * z)
                        + (q - a * (al * be + eps - d * eps)) / ((1.0 - a) * (al - 1.0)) * (1.0 - z));
                assert!((closed - u).norm() < 1e-10 * u.norm().max(1.0), "{closed} vs {u}");
            }
        }
    }

    #[test]
    fn degenerate_collapse() {
        // a = 1/2, γ + δ = 2, α = γ − 1 with ε = −1 forces β = 1 − γ.
        let ga = 1.7;
        let (al, be) = (ga - 1.0, 1.0 - ga);
        let p = HeunParams::new(0.5, 0.0, al, be, ga, -1.0).unwrap();
        assert!((p.gamma + p.delta() - 2.0).abs() < 1e-14);
        let case = TerminationCase { kind: CaseKind::Eps, n: 1 };
        let r = q_roots(&p, case).unwrap();
        let q_star = p.a * al * be - p.a * (1.0 - p.delta());
        let i = r
            .roots
            .iter()
            .position(|q| (q - q_star).norm() < 1e-10)
            .expect("degenerate root present");
        let sol = build_finite_solution(&p, case, i).unwrap();
        assert!(sol.expansion.coefficients[1].norm() < 1e-12);
        let mut two_term = sol.params;
        two_term.q = q_star;
        assert!(crate::expansions::is_two_term(&two_term));
    }

    #[test]
    fn complex_root_solution() {
        // Both linear factors share a root and the constant term is negative.
        let p = HeunParams::new(2.0, 0.0, 3.0, 3.0, 5.0, -1.0).unwrap();
        let case = TerminationCase { kind: CaseKind::Eps, n: 1 };
        let r = q_roots(&p, case).unwrap();
        assert!(r.roots.iter().all(|q| q.im != 0.0), "{:?}", r.roots);
        assert_eq!(r.roots[0], r.roots[1].conj());
        for q in r.roots {
            let sol = finite_solution_at(&p, case, q, Direction::Ascending).unwrap();
            assert!(sol.expansion.coefficients[1].im != 0.0);
            for z in [0.1, 0.25, 0.4] {
                let s: Vec<C64> = (0..3)
                    .map(|k| sum_expansion_derivative(&sol.params, &sol.expansion, z, k, 1e-14).unwrap().value)
                    .collect();
                let res = heun_residual_complex(&sol.params, q, s[0], s[1], s[2], z).unwrap();
                assert!(res.norm() < 1e-10, "{res}");
            }
        }
    }
}
