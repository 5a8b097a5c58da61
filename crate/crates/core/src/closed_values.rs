//! Boundary data of the two-term solutions in closed form.
//!
//! In the two-term slice the coefficients are Pochhammer ratios, so `u(0)`,
//! `u′(0)` and `u(1)` collapse to Clausen `₃F₂(1)` sums (with a gamma
//! prefactor at `z = 1`).

use serde::Serialize;

use crate::error::{HeunError, Result};
use crate::expansions::two_term_flags;
use crate::heun::HeunParams;
use crate::hypergeom::{gamma_ratio, gauss_2f1, hyper_3f2_unit, hyper_4f3_unit, HyperParams2F1};

/// Tolerance requested from the unit-argument sums.
const SUM_TOL: f64 = 1e-13;
/// Agreement required between two closed forms of the same quantity.
const CROSS_TOL: f64 = 1e-8;
const ORBIT_TOL: f64 = 1e-12;

/// Which formula produced a boundary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MethodTag {
    /// Ascending two-term family.
    AscendingClausen,
    /// Descending two-term family.
    DescendingClausen,
    /// Descending `γ₀ = γ` value at one with the Gauss factor pulled out.
    DescendingReduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MethodTags {
    pub u_at_0: MethodTag,
    pub du_at_0: MethodTag,
    pub u_at_1: MethodTag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryValues {
    /// `None` for the ascending family.
    pub gamma0: Option<f64>,
    pub u_at_0: f64,
    pub du_at_0: f64,
    /// `None` when a gamma prefactor sits on a pole.
    pub u_at_1: Option<f64>,
    pub method_tags: MethodTags,
}

fn require_two_term(p: &HeunParams) -> Result<()> {
    let f = two_term_flags(p);
    if f.all() {
        return Ok(());
    }
    let mut failed = Vec::new();
    if !f.a_is_half {
        failed.push("a != 1/2");
    }
    if !f.gamma_plus_delta_is_two {
        failed.push("gamma + delta != 2");
    }
    if !f.q_matches {
        failed.push("q != a*alpha*beta + a*(1-delta)*epsilon");
    }
    Err(HeunError::Domain(format!("not two-term: {}", failed.join(", "))))
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= CROSS_TOL * x.abs().max(y.abs()).max(1.0)
}

/// `u(0)` of the ascending two-term solution.
pub fn value_at_origin(p: &HeunParams) -> Result<f64> {
    require_two_term(p)?;
    let ge = p.gamma + p.epsilon;
    let v = hyper_3f2_unit(
        [(ge - p.alpha) / 2.0, (ge - p.beta) / 2.0, p.epsilon / 2.0],
        [ge / 2.0, (1.0 + ge) / 2.0],
        SUM_TOL,
    )?;
    Ok(v.value)
}

/// `u′(0)` of the ascending two-term solution.
pub fn derivative_at_origin(p: &HeunParams) -> Result<f64> {
    require_two_term(p)?;
    let ab = p.alpha * p.beta;
    if ab == 0.0 {
        return Ok(0.0);
    }
    let ge = p.gamma + p.epsilon;
    let v = hyper_3f2_unit(
        [(ge - p.alpha) / 2.0, (ge - p.beta) / 2.0, p.epsilon / 2.0],
        [(1.0 + ge) / 2.0, (2.0 + ge) / 2.0],
        SUM_TOL,
    )?;
    Ok(ab / ge * v.value)
}

/// `Γ(γ+ε)Γ(γ−1) / (Γ(γ+ε−α)Γ(γ−1+α))`.
pub fn gauss_prefactor(p: &HeunParams) -> Result<f64> {
    let ge = p.gamma + p.epsilon;
    gamma_ratio(&[ge, p.gamma - 1.0], &[ge - p.alpha, p.gamma - 1.0 + p.alpha])
}

/// `u(1)` of the ascending two-term solution.
///
/// For `γ > 1` the prefactor is also summed as `₂F₁(α, β; γ+ε; 1)` and the
/// two must agree.
pub fn value_at_one(p: &HeunParams) -> Result<f64> {
    require_two_term(p)?;
    let pref = gauss_prefactor(p)?;
    if p.gamma > 1.0 {
        let g = gauss_2f1(HyperParams2F1::new(p.alpha, p.beta, p.gamma + p.epsilon, 1.0), 1e-15)?;
        if !close(pref, g.value) {
            return Err(HeunError::Domain(format!(
                "gamma prefactor {pref} disagrees with Gauss sum {}",
                g.value
            )));
        }
    }
    if pref == 0.0 {
        return Ok(0.0);
    }
    let f = hyper_3f2_unit(
        [(p.gamma - 1.0) / 2.0, p.gamma / 2.0, p.epsilon / 2.0],
        [(p.gamma + p.alpha) / 2.0, (p.gamma + p.beta) / 2.0],
        SUM_TOL,
    )?;
    Ok(pref * f.value)
}

/// All three values for the ascending family; `u(1)` is `None` on a pole.
pub fn ascending_boundary_values(p: &HeunParams) -> Result<BoundaryValues> {
    let u_at_1 = match value_at_one(p) {
        Ok(v) => Some(v),
        Err(HeunError::Pole(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundaryValues {
        gamma0: None,
        u_at_0: value_at_origin(p)?,
        du_at_0: derivative_at_origin(p)?,
        u_at_1,
        method_tags: MethodTags {
            u_at_0: MethodTag::AscendingClausen,
            du_at_0: MethodTag::AscendingClausen,
            u_at_1: MethodTag::AscendingClausen,
        },
    })
}

fn is_one_of(x: f64, ys: &[f64]) -> bool {
    ys.iter().any(|&y| (x - y).abs() <= 1e-12 * y.abs().max(1.0))
}

/// Boundary values of the descending two-term solution with base `γ₀`.
pub fn descending_boundary_values(p: &HeunParams, gamma0: f64) -> Result<BoundaryValues> {
    require_two_term(p)?;
    let g0 = gamma0;
    let (al, be, ga) = (p.alpha, p.beta, p.gamma);
    if !is_one_of(g0, &[ga, al, be]) {
        return Err(HeunError::Domain(format!(
            "gamma0 = {g0} must be one of gamma, alpha, beta"
        )));
    }
    let lower = [1.0 + (ga - g0) / 2.0, 1.0 + (al - g0) / 2.0, 1.0 + (be - g0) / 2.0];
    let ge0 = (ga + p.epsilon - g0) / 2.0;
    let u0 = hyper_4f3_unit([1.0, (1.0 - g0) / 2.0, (2.0 - g0) / 2.0, ge0], lower, SUM_TOL)?.value;
    let du0 = if al * be == 0.0 {
        0.0
    } else {
        al * be / g0 * hyper_4f3_unit([1.0, (1.0 - g0) / 2.0, -g0 / 2.0, ge0], lower, SUM_TOL)?.value
    };

    let mut tag1 = MethodTag::DescendingClausen;
    let u1 = if is_one_of(g0, &[al, be]) {
        // 1/Γ(γ₀ − α) or 1/Γ(γ₀ − β) vanishes.
        Some(0.0)
    } else {
        match gamma_ratio(&[g0, g0 - al - be], &[g0 - al, g0 - be]) {
            Err(HeunError::Pole(_)) => None,
            Err(e) => return Err(e),
            Ok(0.0) => Some(0.0),
            Ok(pref) => {
                let f = hyper_4f3_unit(
                    [1.0, (1.0 + al - g0) / 2.0, (1.0 + be - g0) / 2.0, ge0],
                    [(1.0 + al + be - g0) / 2.0, (2.0 + al + be - g0) / 2.0, 1.0 + (ga - g0) / 2.0],
                    SUM_TOL,
                )?;
                let v = pref * f.value;
                if ga - al - be > 1.0 {
                    let r = reduced_value_at_one(p)?;
                    if !close(v, r) {
                        return Err(HeunError::Domain(format!(
                            "descending u(1): general form {v} disagrees with reduced form {r}"
                        )));
                    }
                    tag1 = MethodTag::DescendingReduced;
                    Some(r)
                } else {
                    Some(v)
                }
            }
        }
    };
    Ok(BoundaryValues {
        gamma0: Some(g0),
        u_at_0: u0,
        du_at_0: du0,
        u_at_1: u1,
        method_tags: MethodTags {
            u_at_0: MethodTag::DescendingClausen,
            du_at_0: MethodTag::DescendingClausen,
            u_at_1: tag1,
        },
    })
}

/// `u(1)` of the descending `γ₀ = γ` family as `₂F₁(α, β; γ; 1)·₃F₂(1)`.
pub fn reduced_value_at_one(p: &HeunParams) -> Result<f64> {
    require_two_term(p)?;
    let (al, be, ga) = (p.alpha, p.beta, p.gamma);
    let g = gauss_2f1(HyperParams2F1::new(al, be, ga, 1.0), 1e-15)?.value;
    let f = hyper_3f2_unit(
        [(1.0 + al - ga) / 2.0, (1.0 + be - ga) / 2.0, p.epsilon / 2.0],
        [(1.0 + al + be - ga) / 2.0, (2.0 + al + be - ga) / 2.0],
        SUM_TOL,
    )?;
    Ok(g * f.value)
}

/// The six images of the fourth singular point, deduplicated and sorted.
pub fn a_orbit(a1: f64) -> Result<Vec<f64>> {
    if !a1.is_finite() || a1 == 0.0 || a1 == 1.0 {
        return Err(HeunError::Domain(format!("a1 = {a1} must be finite and not 0 or 1")));
    }
    let mut v = vec![
        a1,
        1.0 / a1,
        1.0 - a1,
        1.0 / (1.0 - a1),
        a1 / (a1 - 1.0),
        (a1 - 1.0) / a1,
    ];
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.dedup_by(|x, y| (*x - *y).abs() <= ORBIT_TOL * y.abs().max(1.0));
    Ok(v)
}
