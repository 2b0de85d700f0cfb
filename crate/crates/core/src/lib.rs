//! Quasi-Monte Carlo importance sampling with self-normalized weights:
//! low-discrepancy sequences, exact star discrepancy, Dirichlet models and
//! numerical checks of the resulting error bounds.

pub mod bounds;
pub mod discrepancy;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod models;
pub mod quadrature;
pub mod sequences;

pub use discrepancy::{
    local_discrepancy, self_normalized_weights, star_discrepancy_exact,
    star_discrepancy_lower_bound, weighted_star_discrepancy, BoxMeasureOracle, CellMass,
    DiscrepancyMode, DiscrepancyResult, Lebesgue, MeasureValue, WeightVector,
};
pub use error::{Error, Result};
pub use models::{Density, DirichletModel, Integrand, MonomialIntegrand, SubsetIndex};
pub use sequences::{PointSet, SequenceKind, Source};
