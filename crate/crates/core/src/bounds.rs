//! Numerical checks of the error bounds for self-normalized importance
//! sampling:
//!
//! * Koksma–Hlawka: `|S(f,u) − Σ w_i f(x_i)| ≤ ‖f‖_{H̃1} D_π(w, P)`,
//! * `D_π(w^u, P) ≤ 4 D_λ(P) ‖u‖_D / ‖u‖_1`,
//! * `|S(f,u) − Q_n(f,u)| ≤ 4 ‖f‖_{H1} ‖u‖_D / ‖u‖_1 · D_λ(P)`.
//!
//! A check passes when `lhs ≤ rhs + slack`; the slack collects the declared
//! accuracy of the box measure and of the `‖u‖_D` estimate.

use serde::Serialize;

use crate::discrepancy::{
    self_normalized_weights, star_discrepancy_exact, weighted_star_discrepancy, WeightVector,
};
use crate::error::{Error, Result};
use crate::estimators::importance_estimate;
use crate::models::{Density, Integrand, UdEstimate};
use crate::quadrature::CompensatedSum;
use crate::sequences::PointSet;

/// One inequality `lhs ≤ rhs` evaluated on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    /// `(rhs − lhs) / rhs`, or 0 when `rhs = 0`.
    pub margin: f64,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = if rhs > 0.0 { (rhs - lhs) / rhs } else { 0.0 };
        BoundCheck {
            lhs,
            rhs,
            slack,
            passed: lhs <= rhs + slack,
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KhCheck {
    /// With the semi-norm `‖f‖_{H̃1}`.
    pub seminorm: BoundCheck,
    /// With the full norm `‖f‖_{H1}`.
    pub full_norm: BoundCheck,
    pub d_weighted: f64,
    pub oracle_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationCheck {
    pub check: BoundCheck,
    pub d_weighted: f64,
    pub d_classical: f64,
    pub oracle_eps: f64,
}

/// Every component and all three checks for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub model: String,
    pub integrand: String,
    pub source: String,
    pub n: usize,
    pub lhs_kh: f64,
    pub rhs_kh: f64,
    pub lhs_rel: f64,
    pub rhs_rel: f64,
    pub lhs_main: f64,
    pub rhs_main: f64,
    pub kh: KhCheck,
    pub relation: BoundCheck,
    pub main: BoundCheck,
    pub d_classical: f64,
    pub d_weighted: f64,
    pub h1_norm: f64,
    pub h1_seminorm: f64,
    pub u_d_estimate: f64,
    pub u_d_refinement_delta: f64,
    pub u_l1: f64,
    pub oracle_eps: f64,
    pub reference: f64,
    pub estimate: f64,
}

impl BoundReport {
    pub fn all_passed(&self) -> bool {
        self.kh.seminorm.passed
            && self.kh.full_norm.passed
            && self.relation.passed
            && self.main.passed
    }
}

fn check_dims(points: &PointSet, density: &Density, integrand: Option<&Integrand>) -> Result<()> {
    let d = points.dim();
    if density.dim() != d || integrand.is_some_and(|f| f.dim() != d) {
        return Err(Error::InvalidParameter(format!(
            "points, density and integrand must share dimension {d}"
        )));
    }
    Ok(())
}

/// `|S(f,u) − Σ w_i f(x_i)|` against `‖f‖ D_π(w, P)` for both norms.
pub fn check_koksma_hlawka(
    points: &PointSet,
    weights: &WeightVector,
    density: &Density,
    integrand: &Integrand,
    budget: u64,
) -> Result<KhCheck> {
    check_dims(points, density, Some(integrand))?;
    let oracle = density.oracle();
    let weighted = weighted_star_discrepancy(points, weights, oracle.as_ref(), budget)?;
    Ok(kh_from_parts(
        (density.expectation(integrand)? - weighted_sum(points, weights, integrand)).abs(),
        weighted.value,
        weighted.oracle_eps,
        integrand,
    ))
}

/// `Σ w_i f(x_i)`.
fn weighted_sum(points: &PointSet, weights: &WeightVector, integrand: &Integrand) -> f64 {
    points
        .iter()
        .zip(weights.as_slice())
        .map(|(x, w)| w * integrand.eval(x))
        .collect::<CompensatedSum>()
        .value()
}

fn kh_from_parts(lhs: f64, d_weighted: f64, oracle_eps: f64, integrand: &Integrand) -> KhCheck {
    let semi = integrand.h1_seminorm();
    let full = integrand.h1_norm();
    KhCheck {
        seminorm: BoundCheck::new(lhs, semi * d_weighted, semi * oracle_eps),
        full_norm: BoundCheck::new(lhs, full * d_weighted, full * oracle_eps),
        d_weighted,
        oracle_eps,
    }
}

/// `D_π(w^u, P)` against `4 D_λ(P) ‖u‖_D / ‖u‖_1`.
pub fn check_discrepancy_relation(
    points: &PointSet,
    density: &Density,
    u_d: &UdEstimate,
    budget: u64,
) -> Result<RelationCheck> {
    check_dims(points, density, None)?;
    let weights = self_normalized_weights(points, |x| density.eval(x))?;
    let weighted = weighted_star_discrepancy(points, &weights, density.oracle().as_ref(), budget)?;
    let classical = star_discrepancy_exact(points, budget)?;
    Ok(relation_from_parts(
        weighted.value,
        weighted.oracle_eps,
        classical.value,
        density.l1_norm(),
        u_d,
    ))
}

fn relation_from_parts(
    d_weighted: f64,
    oracle_eps: f64,
    d_classical: f64,
    l1: f64,
    u_d: &UdEstimate,
) -> RelationCheck {
    let rhs = 4.0 * d_classical * u_d.value / l1;
    let slack = oracle_eps + 4.0 * d_classical * u_d.refinement_delta / l1;
    RelationCheck {
        check: BoundCheck::new(d_weighted, rhs, slack),
        d_weighted,
        d_classical,
        oracle_eps,
    }
}

/// `|S(f,u) − Q_n(f,u)|` against `4 ‖f‖_{H1} ‖u‖_D / ‖u‖_1 · D_λ(P)`.
pub fn check_main_bound(
    points: &PointSet,
    density: &Density,
    integrand: &Integrand,
    u_d: &UdEstimate,
    budget: u64,
) -> Result<BoundCheck> {
    check_dims(points, density, Some(integrand))?;
    let classical = star_discrepancy_exact(points, budget)?;
    let estimate =
        importance_estimate(points, |x| integrand.eval(x), |x| density.eval(x))?.estimate;
    let lhs = (density.expectation(integrand)? - estimate).abs();
    Ok(main_from_parts(
        lhs,
        classical.value,
        integrand.h1_norm(),
        density.l1_norm(),
        u_d,
    ))
}

fn main_from_parts(lhs: f64, d_classical: f64, h1: f64, l1: f64, u_d: &UdEstimate) -> BoundCheck {
    let rhs = 4.0 * h1 * u_d.value / l1 * d_classical;
    let slack = 4.0 * h1 * u_d.refinement_delta / l1 * d_classical;
    BoundCheck::new(lhs, rhs, slack)
}

/// Runs all three checks on one instance, computing each discrepancy once.
pub fn verify_instance(
    points: &PointSet,
    density: &Density,
    integrand: &Integrand,
    u_d: &UdEstimate,
    budget: u64,
) -> Result<BoundReport> {
    check_dims(points, density, Some(integrand))?;
    let report = importance_estimate(points, |x| integrand.eval(x), |x| density.eval(x))?;
    let weights = &report.weights_used;
    let weighted = weighted_star_discrepancy(points, weights, density.oracle().as_ref(), budget)?;
    let classical = star_discrepancy_exact(points, budget)?;
    let reference = density.expectation(integrand)?;
    let lhs = (reference - report.estimate).abs();
    let l1 = density.l1_norm();

    let kh_lhs = (reference - weighted_sum(points, weights, integrand)).abs();
    let kh = kh_from_parts(kh_lhs, weighted.value, weighted.oracle_eps, integrand);
    let relation = relation_from_parts(
        weighted.value,
        weighted.oracle_eps,
        classical.value,
        l1,
        u_d,
    )
    .check;
    let main = main_from_parts(lhs, classical.value, integrand.h1_norm(), l1, u_d);
    Ok(BoundReport {
        model: density.to_string(),
        integrand: integrand.to_string(),
        source: source_name(points),
        n: points.len(),
        lhs_kh: kh.seminorm.lhs,
        rhs_kh: kh.seminorm.rhs,
        lhs_rel: relation.lhs,
        rhs_rel: relation.rhs,
        lhs_main: main.lhs,
        rhs_main: main.rhs,
        kh,
        relation,
        main,
        d_classical: classical.value,
        d_weighted: weighted.value,
        h1_norm: integrand.h1_norm(),
        h1_seminorm: integrand.h1_seminorm(),
        u_d_estimate: u_d.value,
        u_d_refinement_delta: u_d.refinement_delta,
        u_l1: l1,
        oracle_eps: weighted.oracle_eps,
        reference,
        estimate: report.estimate,
    })
}

fn source_name(points: &PointSet) -> String {
    use crate::sequences::Source;
    match points.source() {
        Source::Halton { .. } => "halton".into(),
        Source::Sobol { .. } => "sobol".into(),
        Source::UniformPrng { seed, .. } => format!("uniform(seed={seed})"),
        Source::Explicit => "explicit".into(),
    }
}
