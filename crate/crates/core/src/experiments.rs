//! Convergence study of `Q_n` for the Dirichlet example `α = (2,…,2,d)`,
//! `f = f_(1,…,1)`, plus log–log rate fitting.
//!
//! Config files are flat `key = value` text; lists are comma separated and
//! `#` starts a comment:
//!
//! ```text
//! dims = 2,4,6
//! n_grid = 16,32,64
//! kinds = halton,sobol,uniform
//! seed = 0
//! reps = 32
//! out = results
//! ```

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{importance_estimate, mc_repeated};
use crate::models::{DirichletModel, MonomialIntegrand};
use crate::sequences::{SequenceKind, MAX_QMC_DIM};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub kinds: Vec<SequenceKind>,
    /// First seed of the Monte Carlo repetitions.
    pub seed: u64,
    pub reps: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dims: vec![2, 4, 6],
            n_grid: (4..=16).map(|k| 1 << k).collect(),
            kinds: vec![
                SequenceKind::Halton,
                SequenceKind::Sobol,
                SequenceKind::Uniform,
            ],
            seed: 0,
            reps: 32,
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.n_grid.is_empty() || self.kinds.is_empty() {
            return Err(Error::InvalidParameter(
                "dims, n_grid and kinds must be non-empty".into(),
            ));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0 || d > MAX_QMC_DIM) {
            return Err(Error::DimensionOutOfRange {
                dim: d,
                max: MAX_QMC_DIM,
            });
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "n_grid must be positive and strictly increasing".into(),
            ));
        }
        if self.kinds.contains(&SequenceKind::Uniform) && self.reps < 2 {
            return Err(Error::InvalidParameter("reps must be at least 2".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        text.parse()
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| Error::Parse(format!("{key}: {e}")))
        })
        .collect()
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dims = {}", join(&self.dims))?;
        writeln!(f, "n_grid = {}", join(&self.n_grid))?;
        writeln!(f, "kinds = {}", join(&self.kinds))?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "reps = {}", self.reps)?;
        writeln!(f, "out = {}", self.out.display())
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dims" => config.dims = parse_list(key, value)?,
                "n_grid" => config.n_grid = parse_list(key, value)?,
                "kinds" => config.kinds = parse_list(key, value)?,
                "seed" => {
                    config.seed = value
                        .parse()
                        .map_err(|e| Error::Parse(format!("seed: {e}")))?
                }
                "reps" => {
                    config.reps = value
                        .parse()
                        .map_err(|e| Error::Parse(format!("reps: {e}")))?
                }
                "out" => config.out = PathBuf::from(value),
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        config.validate()?;
        Ok(config)
    }
}

/// One `(kind, d, n)` cell of the study. Monte Carlo rows report the mean
/// estimate and the RMS normalized error over the repetitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub kind: SequenceKind,
    pub d: usize,
    pub n: usize,
    pub estimate: Option<f64>,
    pub reference: f64,
    pub normalized_error: Option<f64>,
    /// Seconds.
    pub wall_time: f64,
    /// `ok`, or the error that prevented an estimate.
    pub status: String,
}

/// The example model and integrand of dimension `d`.
pub fn study_instance(d: usize) -> Result<(DirichletModel, MonomialIntegrand)> {
    Ok((
        DirichletModel::study(d)?,
        MonomialIntegrand::new(vec![1.0; d])?,
    ))
}

/// Rows in canonical `(kind, d, n)` order.
pub fn run_convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    config.validate()?;
    let mut kinds = config.kinds.clone();
    kinds.sort();
    kinds.dedup();
    let mut dims = config.dims.clone();
    dims.sort();
    dims.dedup();
    let mut rows = Vec::new();
    for &kind in &kinds {
        for &d in &dims {
            let (model, f) = study_instance(d)?;
            let reference = model.monomial_expectation(&f)?;
            for &n in &config.n_grid {
                let start = Instant::now();
                let outcome = if kind.is_qmc() {
                    kind.generate(n, d, config.seed).and_then(|p| {
                        let r = importance_estimate(&p, |x| f.eval(x), |x| model.u(x))?
                            .with_reference(reference)?;
                        Ok((r.estimate, r.normalized_error.unwrap_or(f64::NAN)))
                    })
                } else {
                    mc_repeated(
                        config.seed,
                        config.reps,
                        n,
                        d,
                        |x| f.eval(x),
                        |x| model.u(x),
                        reference,
                    )
                    .map(|s| (s.mean_estimate, s.rmse))
                };
                let wall_time = start.elapsed().as_secs_f64();
                let (estimate, normalized_error, status) = match outcome {
                    Ok((e, err)) => (Some(e), Some(err), "ok".to_string()),
                    Err(e) => (None, None, e.to_string()),
                };
                rows.push(ConvergenceRow {
                    kind,
                    d,
                    n,
                    estimate,
                    reference,
                    normalized_error,
                    wall_time,
                    status,
                });
            }
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "kind,d,n,estimate,reference,normalized_error,wall_time,status"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.kind,
            r.d,
            r.n,
            opt(r.estimate),
            r.reference,
            opt(r.normalized_error),
            r.wall_time,
            r.status.replace([',', '\n'], ";")
        )?;
    }
    Ok(())
}

/// Least-squares line `log2(error) = slope · log2(n) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub rows_used: usize,
    /// Rows left out because their error was zero.
    pub rows_zero: usize,
}

/// Fits `(n, error)` pairs; needs at least four positive errors.
pub fn fit_rate(data: &[(usize, f64)]) -> Result<RateFit> {
    let rows_zero = data.iter().filter(|(_, e)| *e == 0.0).count();
    let usable: Vec<(f64, f64)> = data
        .iter()
        .filter(|(n, e)| *n > 0 && *e > 0.0 && e.is_finite())
        .map(|&(n, e)| ((n as f64).log2(), e.log2()))
        .collect();
    if usable.len() < 4 {
        return Err(Error::TooFewRows {
            usable: usable.len(),
        });
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all sample sizes are equal".into()));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        rows_used: usable.len(),
        rows_zero,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub kind: SequenceKind,
    pub d: usize,
    pub fit: Option<RateFit>,
    pub status: String,
}

/// One fit per `(kind, d)` present in `rows`.
pub fn fit_rates(rows: &[ConvergenceRow]) -> Vec<RateRow> {
    let mut groups: Vec<(SequenceKind, usize)> = rows.iter().map(|r| (r.kind, r.d)).collect();
    groups.sort();
    groups.dedup();
    groups
        .into_iter()
        .map(|(kind, d)| {
            let data: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.kind == kind && r.d == d)
                .filter_map(|r| r.normalized_error.map(|e| (r.n, e)))
                .collect();
            match fit_rate(&data) {
                Ok(fit) => RateRow {
                    kind,
                    d,
                    fit: Some(fit),
                    status: "ok".into(),
                },
                Err(e) => RateRow {
                    kind,
                    d,
                    fit: None,
                    status: e.to_string(),
                },
            }
        })
        .collect()
}

pub fn write_rates_csv<W: Write>(rates: &[RateRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "kind,d,slope,intercept,rows_used,rows_zero,status")?;
    for r in rates {
        let (slope, intercept, used, zero) = match r.fit {
            Some(f) => (
                f.slope.to_string(),
                f.intercept.to_string(),
                f.rows_used,
                f.rows_zero,
            ),
            None => (String::new(), String::new(), 0, 0),
        };
        writeln!(
            out,
            "{},{},{slope},{intercept},{used},{zero},{}",
            r.kind,
            r.d,
            r.status.replace([',', '\n'], ";")
        )?;
    }
    Ok(())
}

/// Outcome of one study invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// For every dimension where both are present, each quasi-Monte Carlo slope
/// must be steeper than the Monte Carlo slope, and each quasi-Monte Carlo
/// error at the largest `n` must be below the error at the smallest `n`.
pub fn check_invariants(rows: &[ConvergenceRow], rates: &[RateRow]) -> Vec<InvariantCheck> {
    let mut checks = Vec::new();
    let slope = |kind: SequenceKind, d: usize| {
        rates
            .iter()
            .find(|r| r.kind == kind && r.d == d)
            .and_then(|r| r.fit)
            .map(|f| f.slope)
    };
    for r in rates.iter().filter(|r| r.kind.is_qmc()) {
        let Some(mc) = slope(SequenceKind::Uniform, r.d) else {
            continue;
        };
        let name = format!("slope({},d={}) < slope(uniform,d={})", r.kind, r.d, r.d);
        match r.fit {
            Some(fit) => checks.push(InvariantCheck {
                name,
                passed: fit.slope < mc,
                detail: format!("{} vs {mc}", fit.slope),
            }),
            None => checks.push(InvariantCheck {
                name,
                passed: false,
                detail: r.status.clone(),
            }),
        }
    }
    let mut groups: Vec<(SequenceKind, usize)> = rows
        .iter()
        .filter(|r| r.kind.is_qmc())
        .map(|r| (r.kind, r.d))
        .collect();
    groups.sort();
    groups.dedup();
    for (kind, d) in groups {
        let group: Vec<&ConvergenceRow> =
            rows.iter().filter(|r| r.kind == kind && r.d == d).collect();
        let (first, last) = (group[0], group[group.len() - 1]);
        if group.len() < 2 {
            continue;
        }
        let name = format!("error({kind},d={d},n={}) < error(n={})", last.n, first.n);
        let (passed, detail) = match (first.normalized_error, last.normalized_error) {
            (Some(a), Some(b)) => (b < a, format!("{b} vs {a}")),
            (a, b) => (false, format!("missing error: {a:?}, {b:?}")),
        };
        // Rows that could not be estimated at small n (no point in the
        // simplex) are not counted against the study.
        if first.normalized_error.is_none() && last.normalized_error.is_some() {
            continue;
        }
        checks.push(InvariantCheck {
            name,
            passed,
            detail,
        });
    }
    checks
}

pub fn write_checks_csv<W: Write>(checks: &[InvariantCheck], mut out: W) -> std::io::Result<()> {
    writeln!(out, "check,passed,detail")?;
    for c in checks {
        writeln!(
            out,
            "{},{},{}",
            c.name.replace(',', ";"),
            c.passed,
            c.detail.replace(',', ";")
        )?;
    }
    Ok(())
}

/// Everything produced by one run of the study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub rows: Vec<ConvergenceRow>,
    pub rates: Vec<RateRow>,
    pub checks: Vec<InvariantCheck>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes `convergence.csv`, `rates.csv` and `checks.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        write_convergence_csv(&self.rows, fs::File::create(dir.join("convergence.csv"))?)?;
        write_rates_csv(&self.rates, fs::File::create(dir.join("rates.csv"))?)?;
        write_checks_csv(&self.checks, fs::File::create(dir.join("checks.csv"))?)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let rows = run_convergence(config)?;
    let rates = fit_rates(&rows);
    let checks = check_invariants(&rows, &rates);
    Ok(ExperimentOutcome {
        rows,
        rates,
        checks,
    })
}
