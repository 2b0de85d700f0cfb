//! The unnormalized Dirichlet density on the simplex and everything derived
//! from it: normalizing constant, mixed partials, the box measure and the
//! closed-form expectation of the monomial test integrand.

use statrs::function::gamma::ln_gamma;
use std::sync::OnceLock;

use crate::discrepancy::{BoxMeasureOracle, CellMass, MeasureValue};
use crate::error::{Error, Result};
use crate::models::{MonomialIntegrand, SubsetIndex};
use crate::quadrature::{integrate_box, integrate_clipped, CompensatedSum, GaussLegendre};
use crate::sequences::{sobol, MAX_QMC_DIM};

/// Dirichlet model with parameter `α ∈ [1,∞)^{d+1}`:
/// `u(x) = (1 − Σx_i)^{α_{d+1}−1} ∏ x_i^{α_i−1}` on the simplex, `0` off it.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletModel {
    alpha: Vec<f64>,
    powers: Vec<Power>,
}

/// An exponent, classified so that integral powers use `powi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Power {
    Zero,
    Int(i32),
    Real(f64),
}

impl Power {
    fn of(e: f64) -> Power {
        if e == 0.0 {
            Power::Zero
        } else if e.fract() == 0.0 && e.abs() < 1024.0 {
            Power::Int(e as i32)
        } else {
            Power::Real(e)
        }
    }

    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Power::Zero => 1.0,
            Power::Int(k) => x.powi(k),
            Power::Real(e) => x.powf(e),
        }
    }
}

/// Evaluates `(1 − Σx)^{p_d} ∏ x_i^{p_i}` on the simplex, `0` off it.
#[inline]
pub(crate) fn simplex_monomial(x: &[f64], powers: &[Power]) -> f64 {
    let d = x.len();
    let s: f64 = x.iter().sum();
    if s > 1.0 {
        return 0.0;
    }
    let mut value = powers[d].apply((1.0 - s).max(0.0));
    if value == 0.0 {
        return 0.0;
    }
    for (xi, p) in x.iter().zip(powers) {
        value *= p.apply(*xi);
        if value == 0.0 {
            return 0.0;
        }
    }
    value
}

/// One term `c · u(x; α − shift)` of a mixed partial derivative.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PartialTerm {
    pub coefficient: f64,
    pub powers: Vec<Power>,
}

impl DirichletModel {
    /// `alpha` has `d + 1` entries, each at least 1.
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidParameter(
                "a Dirichlet model needs d + 1 >= 2 parameters".into(),
            ));
        }
        if alpha.len() - 1 > MAX_QMC_DIM {
            return Err(Error::DimensionOutOfRange {
                dim: alpha.len() - 1,
                max: MAX_QMC_DIM,
            });
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a >= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "Dirichlet parameter {a} is below 1"
            )));
        }
        let powers = alpha.iter().map(|a| Power::of(a - 1.0)).collect();
        Ok(DirichletModel { alpha, powers })
    }

    /// The parameters used in the numerical study: `α = (2, …, 2, d)`.
    pub fn study(dim: usize) -> Result<Self> {
        let mut alpha = vec![2.0; dim];
        alpha.push(dim as f64);
        Self::new(alpha)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `u(x; α)`.
    pub fn u(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        simplex_monomial(x, &self.powers)
    }

    /// `ln ∫ u = Σ ln Γ(α_i) − ln Γ(Σ α_i)`.
    pub fn ln_normalizer(&self) -> f64 {
        let total: f64 = self.alpha.iter().sum();
        self.alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(total)
    }

    /// `∫_{[0,1]^d} u = ∏ Γ(α_i) / Γ(Σ α_i)`.
    pub fn normalizer(&self) -> f64 {
        self.ln_normalizer().exp()
    }

    /// `sup u`, attained at the mode `x_i = (α_i − 1) / (Σα − d − 1)`.
    pub fn sup(&self) -> f64 {
        let a: Vec<f64> = self.alpha.iter().map(|a| a - 1.0).collect();
        let total: f64 = a.iter().sum();
        if total == 0.0 {
            return 1.0;
        }
        let d = self.dim();
        let mode: Vec<f64> = a[..d].iter().map(|ai| ai / total).collect();
        self.u(&mode)
    }

    /// Whether the partial-derivative expansion applies:
    /// `α_i ≥ 2` for `i ≤ d` and `α_{d+1} ≥ d`.
    pub fn check_derivative_preconditions(&self) -> Result<()> {
        let d = self.dim();
        if let Some((i, a)) = self.alpha[..d].iter().enumerate().find(|(_, a)| **a < 2.0) {
            return Err(Error::Precondition(format!("alpha_{} = {a} < 2", i + 1)));
        }
        if self.alpha[d] < d as f64 {
            return Err(Error::Precondition(format!(
                "alpha_{} = {} < d = {d}",
                d + 1,
                self.alpha[d]
            )));
        }
        Ok(())
    }

    /// Terms of `∂^{|v|} u / ∂x_v` as `Σ c · u(·; α − (k_v; 0; k_{d+1}))` over
    /// `k_v ∈ {0,1}^{|v|}` with `k_{d+1} = |v| − Σ k_i`; vanishing
    /// coefficients are dropped.
    pub(crate) fn partial_terms(&self, v: SubsetIndex) -> Vec<PartialTerm> {
        let d = self.dim();
        let members: Vec<usize> = v.iter().collect();
        let last = self.alpha[d];
        let mut terms = Vec::with_capacity(1 << members.len());
        for bits in 0u32..(1 << members.len()) {
            let ones = bits.count_ones() as usize;
            let k_last = members.len() - ones;
            let mut coefficient = if k_last % 2 == 1 { -1.0 } else { 1.0 };
            for j in 1..=k_last {
                coefficient *= last - j as f64;
            }
            let mut shift = vec![0.0; d + 1];
            for (pos, &i) in members.iter().enumerate() {
                if bits >> pos & 1 == 1 {
                    coefficient *= self.alpha[i] - 1.0;
                    shift[i] = 1.0;
                }
            }
            if coefficient == 0.0 {
                continue;
            }
            shift[d] = k_last as f64;
            let powers = self
                .alpha
                .iter()
                .zip(&shift)
                .map(|(a, s)| Power::of(a - 1.0 - s))
                .collect();
            terms.push(PartialTerm {
                coefficient,
                powers,
            });
        }
        terms
    }

    /// Mixed partial derivative `∂^{|v|} u(x) / ∂x_v`.
    pub fn partial(&self, v: SubsetIndex, x: &[f64]) -> Result<f64> {
        self.check_derivative_preconditions()?;
        if v.max_index().is_some_and(|m| m >= self.dim()) {
            return Err(Error::InvalidParameter(format!(
                "subset {v:?} exceeds dimension {}",
                self.dim()
            )));
        }
        Ok(eval_terms(&self.partial_terms(v), x))
    }

    /// `S(f_γ, u) = E_π[f_γ]` in closed form.
    pub fn monomial_expectation(&self, f: &MonomialIntegrand) -> Result<f64> {
        let d = self.dim();
        if f.dim() != d {
            return Err(Error::InvalidParameter(format!(
                "integrand dimension {} differs from model dimension {d}",
                f.dim()
            )));
        }
        let gamma = f.gamma();
        let total: f64 = self.alpha.iter().sum();
        let shifted_total = total + gamma.iter().sum::<f64>();
        let mut ln =
            -(d as f64) * std::f64::consts::LN_2 + ln_gamma(total) - ln_gamma(shifted_total);
        for (&a, &g) in self.alpha.iter().zip(gamma) {
            ln += ln_gamma(a + g) - ln_gamma(a);
        }
        Ok(ln.exp())
    }
}

#[inline]
pub(crate) fn eval_terms(terms: &[PartialTerm], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|t| t.coefficient * simplex_monomial(x, &t.powers))
        .sum()
}

/// `π([0, z))` for a Dirichlet model, integrated by Gauss–Legendre rules with
/// the simplex boundary resolved exactly.
///
/// Boxes inside the simplex use a tensor rule, boxes cut by the simplex face
/// an iterated rule split at the face. For integer parameters the orders are
/// chosen from the polynomial degree of `u` so both are exact up to rounding,
/// and the check rules (one order higher) only confirm this. For other
/// parameters the gap to the check rules is the declared accuracy.
#[derive(Debug, Clone)]
pub struct DirichletBoxMeasure {
    model: DirichletModel,
    normalizer: f64,
    inner: [GaussLegendre; 2],
    cut: [GaussLegendre; 2],
    ones: Vec<f64>,
}

impl DirichletBoxMeasure {
    pub fn new(model: DirichletModel) -> Self {
        let d = model.dim();
        let exponents: Vec<f64> = model.alpha.iter().map(|a| a - 1.0).collect();
        let (inner, cut) = if exponents.iter().all(|e| e.fract() == 0.0) {
            let last = exponents[d];
            let axis_degree = exponents[..d].iter().fold(0.0f64, |m, e| m.max(*e)) + last;
            let total_degree: f64 = exponents.iter().sum();
            (
                (axis_degree as usize + 1).div_ceil(2).max(1),
                (total_degree as usize + d).div_ceil(2).max(1),
            )
        } else {
            (6, 8)
        };
        Self::with_orders(model, inner, cut)
    }

    /// Explicit orders for boxes inside the simplex and boxes cut by it.
    pub fn with_orders(model: DirichletModel, inner: usize, cut: usize) -> Self {
        let ones = vec![1.0; model.dim()];
        DirichletBoxMeasure {
            normalizer: model.normalizer(),
            model,
            inner: [GaussLegendre::new(inner), GaussLegendre::new(inner + 1)],
            cut: [GaussLegendre::new(cut), GaussLegendre::new(cut + 1)],
            ones,
        }
    }

    pub fn model(&self) -> &DirichletModel {
        &self.model
    }

    /// Quadrature orders `(inner, cut)` of the main rules.
    pub fn orders(&self) -> (usize, usize) {
        (self.inner[0].order(), self.cut[0].order())
    }

    fn integrate(&self, which: usize, lo: &[f64], hi: &[f64]) -> f64 {
        let u = |x: &[f64]| self.model.u(x);
        let raw = if hi.iter().sum::<f64>() <= 1.0 {
            integrate_box(&self.inner[which], lo, hi, u)
        } else {
            integrate_clipped(&self.cut[which], lo, hi, &self.ones, 1.0, u)
        };
        raw / self.normalizer
    }
}

impl BoxMeasureOracle for DirichletBoxMeasure {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn measure(&self, corner: &[f64]) -> MeasureValue {
        let lo = vec![0.0; corner.len()];
        let value = self.integrate(0, &lo, corner);
        let check = self.integrate(1, &lo, corner);
        MeasureValue {
            value,
            eps: (value - check).abs() + 1e-15,
        }
    }

    fn cell_mass(&self, lo: &[f64], hi: &[f64]) -> Option<CellMass> {
        Some(CellMass {
            value: self.integrate(0, lo, hi),
            check: self.integrate(1, lo, hi),
        })
    }
}

/// `π([0, z))` by quasi-Monte Carlo: `budget` Sobol points are mapped into
/// the box by `x ↦ (z_1 x_1, …, z_d x_d)` and weighted by the Jacobian
/// `∏ z_i`. The accuracy is the gap between the full and half budgets.
#[derive(Debug)]
pub struct QmcDirichletBoxMeasure {
    model: DirichletModel,
    normalizer: f64,
    budget: usize,
    points: OnceLock<Vec<f64>>,
}

impl QmcDirichletBoxMeasure {
    pub const DEFAULT_BUDGET: usize = 1 << 20;

    pub fn new(model: DirichletModel, budget: usize) -> Result<Self> {
        if budget < 2 {
            return Err(Error::InvalidParameter(
                "box-measure budget must be at least 2".into(),
            ));
        }
        Ok(QmcDirichletBoxMeasure {
            normalizer: model.normalizer(),
            model,
            budget,
            points: OnceLock::new(),
        })
    }

    fn points(&self) -> &[f64] {
        self.points.get_or_init(|| {
            sobol(self.budget, self.model.dim())
                .expect("validated dimension and budget")
                .coords()
                .to_vec()
        })
    }
}

impl BoxMeasureOracle for QmcDirichletBoxMeasure {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn measure(&self, corner: &[f64]) -> MeasureValue {
        let d = self.model.dim();
        let jacobian: f64 = corner.iter().product();
        if jacobian == 0.0 {
            return MeasureValue {
                value: 0.0,
                eps: 0.0,
            };
        }
        let half = self.budget / 2;
        let mut x = vec![0.0; d];
        let mut first = CompensatedSum::new();
        let mut all = CompensatedSum::new();
        for (k, s) in self.points().chunks_exact(d).enumerate() {
            for j in 0..d {
                x[j] = corner[j] * s[j];
            }
            let u = self.model.u(&x);
            all.add(u);
            if k < half {
                first.add(u);
            }
        }
        let scale = jacobian / self.normalizer;
        let value = scale * all.value() / self.budget as f64;
        let coarse = scale * first.value() / half as f64;
        MeasureValue {
            value,
            eps: (value - coarse).abs(),
        }
    }
}

/// One evaluation of the quasi-Monte Carlo box measure.
pub fn dirichlet_box_measure(
    model: &DirichletModel,
    corner: &[f64],
    budget: usize,
) -> Result<MeasureValue> {
    if corner.len() != model.dim() || corner.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::InvalidParameter("corner must lie in [0,1]^d".into()));
    }
    Ok(QmcDirichletBoxMeasure::new(model.clone(), budget)?.measure(corner))
}
