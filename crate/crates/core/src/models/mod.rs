//! Densities, integrands and the norms that enter the error bounds.

mod dirichlet;
mod norms;

pub use dirichlet::{
    dirichlet_box_measure, DirichletBoxMeasure, DirichletModel, QmcDirichletBoxMeasure,
};
pub use norms::{
    scaled_seminorm, u_d_norm_estimate, u_d_norm_estimate_with, UdConfig, UdEstimate, MAX_UD_DIM,
};

use std::fmt;
use std::str::FromStr;

use crate::discrepancy::{BoxMeasureOracle, Lebesgue};
use crate::error::{Error, Result};
use crate::sequences::{parse_f64_list, MAX_QMC_DIM};

/// A subset `v ⊆ {1, …, d}` stored as a bitmask (bit `i` is coordinate `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubsetIndex(u32);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    pub fn from_mask(mask: u32) -> Self {
        SubsetIndex(mask)
    }

    /// Zero-based coordinate indices.
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &i in indices {
            if i >= MAX_QMC_DIM {
                return Err(Error::DimensionOutOfRange {
                    dim: i + 1,
                    max: MAX_QMC_DIM,
                });
            }
            mask |= 1 << i;
        }
        Ok(SubsetIndex(mask))
    }

    /// `{1, …, d}`.
    pub fn full(dim: usize) -> Self {
        SubsetIndex(((1u64 << dim) - 1) as u32)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 >> i & 1 == 1
    }

    pub fn max_index(self) -> Option<usize> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros() as usize)
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 >> i & 1 == 1)
    }

    /// All non-empty subsets of `{1, …, d}`.
    pub fn nonempty(dim: usize) -> impl Iterator<Item = SubsetIndex> {
        (1..=Self::full(dim).0).map(SubsetIndex)
    }
}

/// `f_γ(x) = 2^{−d} ∏ x_i^{γ_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialIntegrand {
    gamma: Vec<f64>,
}

impl MonomialIntegrand {
    /// Each exponent must be positive and finite.
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.len() > MAX_QMC_DIM {
            return Err(Error::DimensionOutOfRange {
                dim: gamma.len(),
                max: MAX_QMC_DIM,
            });
        }
        if let Some(g) = gamma.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "monomial exponent {g} must be positive"
            )));
        }
        Ok(MonomialIntegrand { gamma })
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let scale = 0.5f64.powi(self.dim() as i32);
        scale
            * x.iter()
                .zip(&self.gamma)
                .map(|(x, g)| x.powf(*g))
                .product::<f64>()
    }

    /// `∫_{[0,1]^{|v|}} |∂_v f(x_v; 1)| dx_v = 2^{−d} ∏_{i∈v} (1^{γ_i} − 0^{γ_i})`.
    fn subset_term(&self, v: SubsetIndex) -> f64 {
        let scale = 0.5f64.powi(self.dim() as i32);
        scale
            * v.iter()
                .map(|i| 1f64.powf(self.gamma[i]) - 0f64.powf(self.gamma[i]))
                .product::<f64>()
    }

    /// `‖f‖_{H̃1} = Σ_{v≠∅} ∫ |∂_v f(x_v; 1)| dx_v`.
    pub fn h1_seminorm(&self) -> f64 {
        SubsetIndex::nonempty(self.dim())
            .map(|v| self.subset_term(v))
            .sum()
    }

    /// `‖f‖_{H1} = |f(1)| + ‖f‖_{H̃1}`; equal to 1 for every `γ`.
    pub fn h1_norm(&self) -> f64 {
        self.subset_term(SubsetIndex::EMPTY) + self.h1_seminorm()
    }
}

/// A density on the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform { dim: usize },
    Dirichlet(DirichletModel),
}

impl Density {
    pub fn dim(&self) -> usize {
        match self {
            Density::Uniform { dim } => *dim,
            Density::Dirichlet(m) => m.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Density::Uniform { .. } => 1.0,
            Density::Dirichlet(m) => m.u(x),
        }
    }

    /// `‖u‖_{L1}`.
    pub fn l1_norm(&self) -> f64 {
        match self {
            Density::Uniform { .. } => 1.0,
            Density::Dirichlet(m) => m.normalizer(),
        }
    }

    /// The box measure of the normalized density.
    pub fn oracle(&self) -> Box<dyn BoxMeasureOracle> {
        match self {
            Density::Uniform { dim } => Box::new(Lebesgue { dim: *dim }),
            Density::Dirichlet(m) => Box::new(DirichletBoxMeasure::new(m.clone())),
        }
    }

    /// The exact value of `S(f, u)`.
    pub fn expectation(&self, f: &Integrand) -> Result<f64> {
        if f.dim() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "integrand dimension {} differs from density dimension {}",
                f.dim(),
                self.dim()
            )));
        }
        match (self, f) {
            (_, Integrand::Constant { value, .. }) => Ok(*value),
            (Density::Uniform { .. }, Integrand::Monomial(m)) => {
                Ok(m.gamma().iter().map(|g| 0.5 / (g + 1.0)).product())
            }
            (Density::Dirichlet(model), Integrand::Monomial(m)) => model.monomial_expectation(m),
        }
    }

    /// `‖u‖_D`, estimated on a grid for Dirichlet models and exactly 1 for the
    /// uniform density.
    pub fn u_d_norm(&self, config: UdConfig) -> Result<UdEstimate> {
        match self {
            Density::Uniform { dim } => Ok(UdEstimate::uniform(*dim)),
            Density::Dirichlet(m) => u_d_norm_estimate_with(m, config),
        }
    }
}

/// An integrand on the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrand {
    Monomial(MonomialIntegrand),
    Constant { dim: usize, value: f64 },
}

impl Integrand {
    pub fn dim(&self) -> usize {
        match self {
            Integrand::Monomial(m) => m.dim(),
            Integrand::Constant { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Integrand::Monomial(m) => m.eval(x),
            Integrand::Constant { value, .. } => *value,
        }
    }

    pub fn h1_norm(&self) -> f64 {
        match self {
            Integrand::Monomial(m) => m.h1_norm(),
            Integrand::Constant { value, .. } => value.abs(),
        }
    }

    pub fn h1_seminorm(&self) -> f64 {
        match self {
            Integrand::Monomial(m) => m.h1_seminorm(),
            Integrand::Constant { .. } => 0.0,
        }
    }

    /// Parses an integrand spec; `dim` fills in the dimension of a constant
    /// when it has no `d=` key.
    pub fn parse(spec: &str, dim: Option<usize>) -> Result<Self> {
        let (kind, params) = split_spec(spec)?;
        match kind {
            "monomial" => {
                let gamma = params.list("gamma")?;
                if let Some(d) = params.dim()?.or(dim) {
                    if d != gamma.len() {
                        return Err(Error::Parse(format!(
                            "gamma has {} entries, expected {d}",
                            gamma.len()
                        )));
                    }
                }
                Ok(Integrand::Monomial(MonomialIntegrand::new(gamma)?))
            }
            "constant" => {
                let value = params.scalar("c")?;
                let dim = params
                    .dim()?
                    .or(dim)
                    .ok_or_else(|| Error::Parse("constant integrand needs d".into()))?;
                check_dim(dim)?;
                Ok(Integrand::Constant { dim, value })
            }
            other => Err(Error::Parse(format!("unknown integrand kind '{other}'"))),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_QMC_DIM {
        return Err(Error::DimensionOutOfRange {
            dim,
            max: MAX_QMC_DIM,
        });
    }
    Ok(())
}

impl FromStr for Density {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (kind, params) = split_spec(spec)?;
        match kind {
            "uniform" => {
                let dim = params
                    .dim()?
                    .ok_or_else(|| Error::Parse("uniform density needs d".into()))?;
                check_dim(dim)?;
                Ok(Density::Uniform { dim })
            }
            "dirichlet" => {
                let alpha = match params.get("alpha") {
                    Some(_) => params.list("alpha")?,
                    None => {
                        let dim = params
                            .dim()?
                            .ok_or_else(|| Error::Parse("dirichlet needs d or alpha".into()))?;
                        check_dim(dim)?;
                        return Ok(Density::Dirichlet(DirichletModel::study(dim)?));
                    }
                };
                if let Some(d) = params.dim()? {
                    if alpha.len() != d + 1 {
                        return Err(Error::Parse(format!(
                            "alpha has {} entries, expected {}",
                            alpha.len(),
                            d + 1
                        )));
                    }
                }
                Ok(Density::Dirichlet(DirichletModel::new(alpha)?))
            }
            other => Err(Error::Parse(format!("unknown density kind '{other}'"))),
        }
    }
}

impl FromStr for Integrand {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        Integrand::parse(spec, None)
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Uniform { dim } => write!(f, "uniform:d={dim}"),
            Density::Dirichlet(m) => write!(f, "dirichlet:d={},alpha={}", m.dim(), join(m.alpha())),
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Monomial(m) => write!(f, "monomial:gamma={}", join(m.gamma())),
            Integrand::Constant { dim, value } => write!(f, "constant:d={dim},c={value}"),
        }
    }
}

/// `kind:key=v1,v2,key2=v3`; a token without `=` continues the previous list.
struct Params(Vec<(String, String)>);

fn split_spec(spec: &str) -> Result<(&str, Params)> {
    let (kind, rest) = spec.trim().split_once(':').unwrap_or((spec.trim(), ""));
    let mut pairs: Vec<(String, String)> = Vec::new();
    for token in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => match pairs.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(token);
                }
                None => return Err(Error::Parse(format!("expected key=value in '{spec}'"))),
            },
        }
    }
    Ok((kind, Params(pairs)))
}

impl Params {
    fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn dim(&self) -> Result<Option<usize>> {
        self.get("d")
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("d: {e}")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing '{key}'")))?;
        parse_f64_list(raw).map_err(|e| Error::Parse(format!("{key}: {e}")))
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing '{key}'")))?;
        raw.parse().map_err(|e| Error::Parse(format!("{key}: {e}")))
    }
}
