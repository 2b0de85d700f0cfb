use proptest::prelude::*;
use qmcis::discrepancy::DEFAULT_BUDGET;
use qmcis::estimators::importance_estimate;
use qmcis::sequences::{halton, radical_inverse, sobol};
use qmcis::{
    self_normalized_weights, star_discrepancy_exact, star_discrepancy_lower_bound,
    weighted_star_discrepancy, DirichletModel, Lebesgue, PointSet, WeightVector,
};

fn point_set(max_n: usize, max_d: usize) -> impl Strategy<Value = PointSet> {
    (1..=max_d, 1..=max_n).prop_flat_map(|(d, n)| {
        proptest::collection::vec(0.0f64..1.0, n * d)
            .prop_map(move |coords| PointSet::explicit(d, coords).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrepancy_is_permutation_invariant(p in point_set(12, 3), seed in any::<u64>()) {
        let n = p.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed as usize) % n);
        perm.reverse();
        let a = star_discrepancy_exact(&p, DEFAULT_BUDGET).unwrap();
        let b = star_discrepancy_exact(&p.permuted(&perm).unwrap(), DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(a.value, b.value);
    }

    #[test]
    fn discrepancy_bounds(p in point_set(12, 3), seed in any::<u64>()) {
        let exact = star_discrepancy_exact(&p, DEFAULT_BUDGET).unwrap();
        prop_assert!(exact.value > 0.0 && exact.value <= 1.0);
        prop_assert!(exact.value >= 0.5 / p.len() as f64 - 1e-15 || p.dim() > 1);
        let lower = star_discrepancy_lower_bound(&p, 20, seed);
        prop_assert!(lower.value <= exact.value + 1e-15);
    }

    #[test]
    fn uniform_weights_reduce_to_classical(p in point_set(10, 3)) {
        let exact = star_discrepancy_exact(&p, DEFAULT_BUDGET).unwrap();
        let lebesgue = Lebesgue { dim: p.dim() };
        let weighted = weighted_star_discrepancy(&p, &WeightVector::uniform(p.len()), &lebesgue, DEFAULT_BUDGET).unwrap();
        prop_assert!((exact.value - weighted.value).abs() < 1e-12);
    }

    #[test]
    fn self_normalized_weights_sum_to_one(p in point_set(30, 4)) {
        let w = self_normalized_weights(&p, |x| 0.1 + x.iter().sum::<f64>()).unwrap();
        let total: f64 = w.as_slice().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(w.as_slice().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn estimator_is_scale_invariant(p in point_set(40, 2), exponent in -6i32..=6) {
        let model = DirichletModel::new(vec![2.0; p.dim() + 1]).unwrap();
        let c = 10f64.powi(exponent);
        let f = |x: &[f64]| x.iter().product::<f64>();
        let base = importance_estimate(&p, f, |x| model.u(x));
        let scaled = importance_estimate(&p, f, |x| c * model.u(x));
        match (base, scaled) {
            (Ok(a), Ok(b)) => prop_assert!((a.estimate - b.estimate).abs() <= 1e-12 * a.estimate.abs()),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "scaling changed solvability"),
        }
    }

    #[test]
    fn estimator_is_permutation_invariant(p in point_set(40, 3)) {
        let n = p.len();
        let perm: Vec<usize> = (0..n).rev().collect();
        let f = |x: &[f64]| x[0] * x[0];
        let u = |x: &[f64]| 1.0 + x.iter().sum::<f64>();
        let a = importance_estimate(&p, f, u).unwrap().estimate;
        let b = importance_estimate(&p.permuted(&perm).unwrap(), f, u).unwrap().estimate;
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
    }

    #[test]
    fn radical_inverse_stays_in_unit_interval(i in 1u64..u64::MAX / 2, b in 2u32..60) {
        let r = radical_inverse(i, b);
        prop_assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn generators_stay_in_unit_cube(n in 1usize..300, d in 1usize..=16) {
        for p in [halton(n, d).unwrap(), sobol(n, d).unwrap()] {
            prop_assert!(p.coords().iter().all(|c| (0.0..1.0).contains(c)));
            prop_assert_eq!(p.len(), n);
        }
    }
}
