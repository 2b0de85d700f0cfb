//! Subcommand implementations. Each returns `Ok(false)` when a check fails.

use std::error::Error;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qmcis::bounds::{verify_instance, BoundReport};
use qmcis::estimators::importance_estimate;
use qmcis::experiments::{run_experiment, ExperimentConfig};
use qmcis::models::{DirichletBoxMeasure, UdConfig};
use qmcis::{
    self_normalized_weights, star_discrepancy_exact, star_discrepancy_lower_bound,
    weighted_star_discrepancy, BoxMeasureOracle, Density, DirichletModel, Integrand, Lebesgue,
    PointSet, SequenceKind, WeightVector,
};
use serde::Serialize;
use serde_json::Value;

type CmdResult = Result<bool, Box<dyn Error>>;

pub enum PointSource {
    File(PathBuf),
    Generate(SequenceKind, usize, u64),
}

fn read_points(path: &Path) -> Result<PointSet, Box<dyn Error>> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(PointSet::read_csv(BufReader::new(file))?)
}

fn read_numbers(path: &Path) -> Result<Vec<f64>, Box<dyn Error>> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for line in text.lines().map(|l| l.split('#').next().unwrap_or("")) {
        for token in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            out.push(
                token
                    .parse::<f64>()
                    .map_err(|e| format!("{}: '{token}': {e}", path.display()))?,
            );
        }
    }
    Ok(out)
}

fn print_json(value: &impl Serialize) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

pub fn generate(
    kind: SequenceKind,
    n: usize,
    dim: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> CmdResult {
    let points = kind.generate(n, dim, seed)?;
    match out {
        Some(path) => points.write_csv(BufWriter::new(File::create(&path)?))?,
        None => points.write_csv(BufWriter::new(io::stdout().lock()))?,
    }
    Ok(true)
}

/// `lebesgue`, `uniform…`, `dirichlet:a1,…` or a full model spec.
fn parse_measure(spec: &str, dim: usize) -> Result<Option<DirichletModel>, Box<dyn Error>> {
    let spec = spec.trim();
    if spec == "lebesgue" || spec.starts_with("uniform") {
        return Ok(None);
    }
    let Some(rest) = spec.strip_prefix("dirichlet:") else {
        return Err(format!("unknown measure '{spec}'").into());
    };
    let model = if rest.contains('=') {
        match spec.parse::<Density>()? {
            Density::Dirichlet(m) => m,
            Density::Uniform { .. } => unreachable!(),
        }
    } else {
        let alpha = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("measure parameters: {e}"))?;
        DirichletModel::new(alpha)?
    };
    if model.dim() != dim {
        return Err(format!("measure has dimension {}, points have {dim}", model.dim()).into());
    }
    Ok(Some(model))
}

pub fn discrepancy(
    points: &Path,
    weights: Option<&Path>,
    measure: &str,
    lower_bound: bool,
    effort: u64,
    seed: u64,
    budget: u64,
) -> CmdResult {
    let points = read_points(points)?;
    let model = parse_measure(measure, points.dim())?;
    if lower_bound {
        if weights.is_some() || model.is_some() {
            return Err("lower-bound mode supports only the classical discrepancy".into());
        }
        print_json(&star_discrepancy_lower_bound(&points, effort, seed))?;
        return Ok(true);
    }
    let result = match (model, weights) {
        (None, None) => star_discrepancy_exact(&points, budget)?,
        (model, weights) => {
            let oracle: Box<dyn BoxMeasureOracle> = match &model {
                Some(m) => Box::new(DirichletBoxMeasure::new(m.clone())),
                None => Box::new(Lebesgue { dim: points.dim() }),
            };
            let w = match (weights, &model) {
                (Some(path), _) => WeightVector::new(read_numbers(path)?)?,
                (None, Some(m)) => self_normalized_weights(&points, |x| m.u(x))?,
                (None, None) => WeightVector::uniform(points.len()),
            };
            weighted_star_discrepancy(&points, &w, oracle.as_ref(), budget)?
        }
    };
    print_json(&result)?;
    Ok(true)
}

pub fn estimate(
    source: PointSource,
    model: &str,
    integrand: &str,
    reference: &str,
    with_weights: bool,
) -> CmdResult {
    let density: Density = model.parse()?;
    let f = Integrand::parse(integrand, Some(density.dim()))?;
    let points = match source {
        PointSource::File(path) => read_points(&path)?,
        PointSource::Generate(kind, n, seed) => kind.generate(n, density.dim(), seed)?,
    };
    if points.dim() != density.dim() || f.dim() != density.dim() {
        return Err("points, model and integrand dimensions differ".into());
    }
    let mut report = importance_estimate(&points, |x| f.eval(x), |x| density.eval(x))?;
    report = match reference {
        "none" => report,
        "auto" => report.with_reference(density.expectation(&f)?)?,
        value => report.with_reference(value.parse().map_err(|e| format!("--reference: {e}"))?)?,
    };
    let mut json = serde_json::to_value(&report)?;
    if !with_weights {
        if let Value::Object(map) = &mut json {
            map.remove("weights_used");
        }
    }
    print_json(&json)?;
    Ok(true)
}

fn summary_row(r: &BoundReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.n,
        r.d_classical,
        r.d_weighted,
        r.kh.seminorm.lhs,
        r.kh.seminorm.rhs,
        r.relation.rhs,
        r.main.lhs,
        r.main.rhs,
        if r.main.lhs > 0.0 {
            r.main.rhs / r.main.lhs
        } else {
            f64::INFINITY
        },
        if r.all_passed() { "pass" } else { "FAIL" }
    )
}

#[allow(clippy::too_many_arguments)]
pub fn verify(
    model: &str,
    integrand: &str,
    kind: SequenceKind,
    n_list: &[usize],
    budget: u64,
    ud_grid: usize,
    ud_order: usize,
    summary: Option<PathBuf>,
) -> CmdResult {
    let density: Density = model.parse()?;
    let f = Integrand::parse(integrand, Some(density.dim()))?;
    let u_d = density.u_d_norm(UdConfig {
        grid: ud_grid,
        order: ud_order,
    })?;
    let mut rows = vec![
        "n,d_classical,d_weighted,lhs_kh,rhs_kh,rhs_rel,lhs_main,rhs_main,ratio_main,verdict"
            .to_string(),
    ];
    let mut all_passed = true;
    let mut out = io::stdout().lock();
    for &n in n_list {
        let points = kind.generate(n, density.dim(), 0)?;
        let report = verify_instance(&points, &density, &f, &u_d, budget)?;
        all_passed &= report.all_passed();
        serde_json::to_writer(&mut out, &report)?;
        writeln!(out)?;
        rows.push(summary_row(&report));
    }
    let table = rows.join("\n") + "\n";
    match summary {
        Some(path) => fs::write(path, table)?,
        None => eprint!("{table}"),
    }
    Ok(all_passed)
}

pub fn experiment(config: &Path, out: Option<PathBuf>) -> CmdResult {
    let mut config = ExperimentConfig::load(config)?;
    if let Some(dir) = out {
        config.out = dir;
    }
    let outcome = run_experiment(&config)?;
    outcome.write(&config.out)?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "kind,d,slope,rows_used")?;
    for r in &outcome.rates {
        match r.fit {
            Some(fit) => writeln!(
                stdout,
                "{},{},{:.4},{}",
                r.kind, r.d, fit.slope, fit.rows_used
            )?,
            None => writeln!(stdout, "{},{},,0 ({})", r.kind, r.d, r.status)?,
        }
    }
    for c in &outcome.checks {
        writeln!(
            stdout,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    writeln!(stdout, "wrote {}", config.out.display())?;
    Ok(outcome.passed())
}
