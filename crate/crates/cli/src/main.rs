//! `qmcis`: quasi-Monte Carlo importance sampling from the command line.
//!
//! Exit status is 0 on success, 1 when a verification or experiment check
//! fails and 2 on usage or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qmcis::discrepancy::DEFAULT_BUDGET;
use qmcis::SequenceKind;

#[derive(Parser)]
#[command(
    name = "qmcis",
    version,
    about = "Quasi-Monte Carlo importance sampling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Halton,
    Sobol,
    Uniform,
}

impl From<Kind> for SequenceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Halton => SequenceKind::Halton,
            Kind::Sobol => SequenceKind::Sobol,
            Kind::Uniform => SequenceKind::Uniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QmcKind {
    Halton,
    Sobol,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    LowerBound,
}

#[derive(Subcommand)]
enum Command {
    /// Write a point set as CSV, one point per row.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        /// Seed for the uniform kind.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Star discrepancy of a point set, classical or weighted.
    Discrepancy {
        #[arg(long)]
        points: PathBuf,
        /// Weights, one per point. Defaults to 1/n for the Lebesgue measure
        /// and to self-normalized density weights for a Dirichlet measure.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// `lebesgue`, `dirichlet:a1,...,a(d+1)` or a model spec such as
        /// `dirichlet:d=2,alpha=2,2,2`.
        #[arg(long, default_value = "lebesgue")]
        measure: String,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Random starts for the lower-bound search.
        #[arg(long, default_value_t = 1000)]
        effort: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of critical-grid cells to enumerate.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Self-normalized importance-sampling estimate of E[f] under a model.
    Estimate {
        #[arg(long, conflicts_with = "kind", required_unless_present = "kind")]
        points: Option<PathBuf>,
        #[arg(long, value_enum, requires = "n")]
        kind: Option<Kind>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        model: String,
        #[arg(long)]
        integrand: String,
        /// `auto` (closed form), `none`, or a number.
        #[arg(long, default_value = "auto")]
        reference: String,
        /// Include the weight vector in the report.
        #[arg(long)]
        with_weights: bool,
    },
    /// Check the error bounds on Halton or Sobol point sets.
    Verify {
        #[arg(long)]
        model: String,
        #[arg(long)]
        integrand: String,
        #[arg(long, value_enum)]
        kind: QmcKind,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 32)]
        ud_grid: usize,
        #[arg(long, default_value_t = 8)]
        ud_order: usize,
        /// Summary CSV; written to standard error when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Convergence study; writes convergence.csv, rates.csv and checks.csv.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            kind,
            n,
            dim,
            seed,
            out,
        } => commands::generate(kind.into(), n, dim, seed, out),
        Command::Discrepancy {
            points,
            weights,
            measure,
            mode,
            effort,
            seed,
            budget,
        } => commands::discrepancy(
            &points,
            weights.as_deref(),
            &measure,
            mode == Mode::LowerBound,
            effort,
            seed,
            budget,
        ),
        Command::Estimate {
            points,
            kind,
            n,
            seed,
            model,
            integrand,
            reference,
            with_weights,
        } => {
            let source = match (points, kind, n) {
                (Some(p), _, _) => commands::PointSource::File(p),
                (None, Some(k), Some(n)) => commands::PointSource::Generate(k.into(), n, seed),
                _ => unreachable!("clap enforces --points or --kind with --n"),
            };
            commands::estimate(source, &model, &integrand, &reference, with_weights)
        }
        Command::Verify {
            model,
            integrand,
            kind,
            n_list,
            budget,
            ud_grid,
            ud_order,
            summary,
        } => {
            let kind = match kind {
                QmcKind::Halton => SequenceKind::Halton,
                QmcKind::Sobol => SequenceKind::Sobol,
            };
            commands::verify(
                &model, &integrand, kind, &n_list, budget, ud_grid, ud_order, summary,
            )
        }
        Command::Experiment { config, out } => commands::experiment(&config, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
