//! Self-normalized importance sampling: `Q_n(f,u) = Σ f(x_j) u(x_j) / Σ u(x_j)`.
//!
//! The same ratio is the Monte Carlo estimator when the points are i.i.d.
//! uniform and the quasi-Monte Carlo estimator for low-discrepancy points.

use serde::Serialize;

use crate::discrepancy::{density_values, WeightVector};
use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;
use crate::sequences::{uniform_random, PointSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub n: usize,
    pub weights_used: WeightVector,
    pub reference: Option<f64>,
    pub abs_error: Option<f64>,
    pub normalized_error: Option<f64>,
}

impl EstimateReport {
    /// Attaches the exact value and the derived errors.
    pub fn with_reference(mut self, reference: f64) -> Result<Self> {
        self.normalized_error = Some(normalized_error(self.estimate, reference)?);
        self.abs_error = Some((self.estimate - reference).abs());
        self.reference = Some(reference);
        Ok(self)
    }
}

/// `|1 − estimate / reference|`.
pub fn normalized_error(estimate: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((1.0 - estimate / reference).abs())
}

/// Self-normalized estimate of `E_π[f]` for `π ∝ u` from the points `P`.
pub fn importance_estimate<F, U>(points: &PointSet, f: F, u: U) -> Result<EstimateReport>
where
    F: Fn(&[f64]) -> f64,
    U: Fn(&[f64]) -> f64,
{
    let densities = density_values(points, u)?;
    // The numerator is accumulated relative to the first retained value of
    // f, so constant integrands are reproduced without rounding.
    let mut shift = None;
    let mut numerator = CompensatedSum::new();
    let mut denominator = CompensatedSum::new();
    for (x, &ux) in points.iter().zip(&densities) {
        if ux == 0.0 {
            continue;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "integrand is {fx} at {x:?}"
            )));
        }
        let base = *shift.get_or_insert(fx);
        numerator.add((fx - base) * ux);
        denominator.add(ux);
    }
    let total = denominator.value();
    let Some(base) = shift.filter(|_| total > 0.0) else {
        return Err(Error::AllWeightsZero);
    };
    let estimate = base + numerator.value() / total;
    if !estimate.is_finite() {
        return Err(Error::InvalidParameter(format!("estimate is {estimate}")));
    }
    let weights = WeightVector::new(densities.into_iter().map(|v| v / total).collect())?;
    Ok(EstimateReport {
        estimate,
        n: points.len(),
        weights_used: weights,
        reference: None,
        abs_error: None,
        normalized_error: None,
    })
}

/// Repeated Monte Carlo runs on seeds `seed, seed + 1, …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub n: usize,
    pub reps: usize,
    pub runs: Vec<EstimateReport>,
    /// Runs where every point had zero density.
    pub failures: usize,
    pub mean_estimate: f64,
    /// Root mean square of the per-run normalized errors.
    pub rmse: f64,
}

pub fn mc_repeated<F, U>(
    seed: u64,
    reps: usize,
    n: usize,
    dim: usize,
    f: F,
    u: U,
    reference: f64,
) -> Result<McSummary>
where
    F: Fn(&[f64]) -> f64,
    U: Fn(&[f64]) -> f64,
{
    if reps < 2 {
        return Err(Error::InvalidParameter(
            "repeated Monte Carlo needs reps >= 2".into(),
        ));
    }
    let mut runs = Vec::with_capacity(reps);
    let mut failures = 0;
    for rep in 0..reps as u64 {
        let points = uniform_random(n, dim, seed.wrapping_add(rep))?;
        match importance_estimate(&points, &f, &u) {
            Ok(report) => runs.push(report.with_reference(reference)?),
            Err(Error::AllWeightsZero) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    if runs.len() < 2 {
        return Err(Error::TooFewRuns {
            succeeded: runs.len(),
            reps,
        });
    }
    let count = runs.len() as f64;
    let mean_estimate = runs
        .iter()
        .map(|r| r.estimate)
        .collect::<CompensatedSum>()
        .value()
        / count;
    let mean_square = runs
        .iter()
        .map(|r| r.normalized_error.unwrap_or(0.0).powi(2))
        .collect::<CompensatedSum>()
        .value()
        / count;
    Ok(McSummary {
        n,
        reps,
        runs,
        failures,
        mean_estimate,
        rmse: mean_square.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_ratio() {
        let p = PointSet::from_points(&[[0.25], [0.5]]).unwrap();
        let r = importance_estimate(&p, |x| x[0], |x| x[0]).unwrap();
        assert!((r.estimate - 5.0 / 12.0).abs() < 1e-16);
        assert_eq!(r.weights_used.as_slice(), &[1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(r.n, 2);
    }

    #[test]
    fn constants_are_reproduced() {
        let p = PointSet::from_points(&[[0.1, 0.2], [0.7, 0.05], [0.3, 0.3]]).unwrap();
        let r = importance_estimate(&p, |_| 2.5, |x| x[0] * x[1]).unwrap();
        assert_eq!(r.estimate, 2.5);
    }

    #[test]
    fn zero_density_points_stay_in_n() {
        let p = PointSet::from_points(&[[0.1], [0.9]]).unwrap();
        let r = importance_estimate(&p, |x| x[0], |x| if x[0] < 0.5 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(r.estimate, 0.1);
        assert_eq!(r.n, 2);
        assert_eq!(r.weights_used.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn vanishing_density_is_an_error() {
        let p = PointSet::from_points(&[[0.1], [0.9]]).unwrap();
        assert!(matches!(
            importance_estimate(&p, |x| x[0], |_| 0.0),
            Err(Error::AllWeightsZero)
        ));
        assert!(matches!(
            importance_estimate(&p, |x| x[0], |_| -1.0),
            Err(Error::InvalidDensity { index: 0, .. })
        ));
    }

    #[test]
    fn normalized_errors() {
        assert_eq!(normalized_error(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(normalized_error(0.0, 3.0).unwrap(), 1.0);
        assert!((normalized_error(1.05 * 3.0, 3.0).unwrap() - 0.05).abs() < 1e-15);
        assert!(matches!(
            normalized_error(1.0, 0.0),
            Err(Error::ZeroReference)
        ));
    }

    #[test]
    fn repeated_runs() {
        let a = mc_repeated(11, 4, 64, 2, |x| x[0], |x| x[1], 0.25).unwrap();
        let b = mc_repeated(11, 4, 64, 2, |x| x[0], |x| x[1], 0.25).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs.len(), 4);
        let c = mc_repeated(3, 8, 32, 1, |_| 1.5, |x| x[0], 1.5).unwrap();
        assert_eq!(c.rmse, 0.0);
        assert!(mc_repeated(3, 1, 32, 1, |_| 1.5, |x| x[0], 1.5).is_err());
        assert!(matches!(
            mc_repeated(3, 4, 8, 1, |_| 1.0, |_| 0.0, 1.0),
            Err(Error::TooFewRuns {
                succeeded: 0,
                reps: 4
            })
        ));
    }
}
