//! Fixtures shared by the benchmarks.

use qmcis::{Density, DirichletModel, Integrand, MonomialIntegrand, PointSet, SequenceKind};

/// The study instance in dimension `d`: `α = (2,…,2,d)`, `γ = 1`.
pub fn study(d: usize) -> (Density, Integrand) {
    let model = DirichletModel::study(d).expect("supported dimension");
    let f = MonomialIntegrand::new(vec![1.0; d]).expect("positive exponents");
    (Density::Dirichlet(model), Integrand::Monomial(f))
}

pub fn points(kind: SequenceKind, n: usize, d: usize) -> PointSet {
    kind.generate(n, d, 7).expect("valid generator arguments")
}
