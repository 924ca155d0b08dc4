//! `oufield`: run integrals, simulate Ornstein–Uhlenbeck fields, and verify
//! the calculus and field identities from the command line.
//!
//! Exit codes: 0 success, 1 verification failure or numerical breakdown,
//! 2 configuration error.

mod commands;
mod config;
mod error;
mod integrands;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{config as config_error, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "oufield",
    version,
    about = "Riemann–Stieltjes integrals and Ornstein–Uhlenbeck fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an integral of a built-in integrand against an integrator.
    Integrate(IntegrateArgs),
    /// Generate a driver ensemble and transform it.
    Simulate(SimulateArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Summarize the reports in the output directory.
    Report,
}

/// Settings shared by every command. Each flag overrides the configuration
/// key of the same name.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory [default: $OUFIELD_OUT_DIR, else ./oufield-out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Dimension N.
    #[arg(long, global = true)]
    dim: Option<String>,
    /// Mean-reversion rates, comma separated.
    #[arg(long, global = true)]
    theta: Option<String>,
    /// Hurst indices for the fractional driver, comma separated.
    #[arg(long, global = true)]
    hurst: Option<String>,
    /// Lower corner of the box or window.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lower: Option<String>,
    /// Upper corner of the box or window.
    #[arg(long, global = true, allow_hyphen_values = true)]
    upper: Option<String>,
    /// Cells per axis of the window.
    #[arg(long, global = true)]
    cells: Option<String>,
    /// Number of replications M.
    #[arg(long, global = true)]
    replications: Option<String>,
    /// Master seed; every random stream derives from it.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Truncation depth of the OU integral.
    #[arg(long, global = true)]
    truncation: Option<String>,
    /// Levels in the refinement ladder.
    #[arg(long, global = true)]
    refinements: Option<String>,
    /// Cells per axis at the coarsest level.
    #[arg(long, global = true)]
    base_cells: Option<String>,
    /// Report the Richardson extrapolation of the two finest levels.
    #[arg(long, global = true)]
    extrapolate: Option<String>,
    /// Numerical tolerance of a check.
    #[arg(long, global = true)]
    tolerance: Option<String>,
    /// Significance level of statistical tests.
    #[arg(long, global = true)]
    alpha: Option<String>,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    /// box, mixed, triangle, complement, or additivity.
    #[arg(long)]
    kind: Option<String>,
    /// Integrand: one, sum, product, exp, sin, or mix.
    #[arg(long)]
    g: Option<String>,
    /// Integrator, from the same list.
    #[arg(long)]
    f: Option<String>,
    /// Saved grid field `DIR/STEM` to use as the integrator.
    #[arg(long)]
    field: Option<String>,
    /// Triangle apex t.
    #[arg(long, allow_hyphen_values = true)]
    apex: Option<String>,
    /// Axes of the mixed differential, 1-based and comma separated.
    #[arg(long)]
    axes: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// bsheet or fbm.
    #[arg(long)]
    driver: Option<String>,
    /// ou, lamperti, or none.
    #[arg(long)]
    transform: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// identities, round-trips, stationarity, langevin, or all.
    #[arg(long)]
    suite: Option<String>,
    /// Field tested by the stationarity suite: ou or bsheet.
    #[arg(long)]
    source: Option<String>,
    /// Driver of the OU field: bsheet or fbm.
    #[arg(long)]
    driver: Option<String>,
}

fn flags(cli: &Cli) -> BTreeMap<String, String> {
    let c = &cli.common;
    let mut pairs: Vec<(&str, &Option<String>)> = vec![
        ("out", &c.out),
        ("dim", &c.dim),
        ("theta", &c.theta),
        ("hurst", &c.hurst),
        ("lower", &c.lower),
        ("upper", &c.upper),
        ("cells", &c.cells),
        ("replications", &c.replications),
        ("seed", &c.seed),
        ("truncation", &c.truncation),
        ("refinements", &c.refinements),
        ("base_cells", &c.base_cells),
        ("extrapolate", &c.extrapolate),
        ("tolerance", &c.tolerance),
        ("alpha", &c.alpha),
    ];
    match &cli.command {
        Command::Integrate(a) => pairs.extend([
            ("kind", &a.kind),
            ("g", &a.g),
            ("f", &a.f),
            ("field", &a.field),
            ("apex", &a.apex),
            ("axes", &a.axes),
        ]),
        Command::Simulate(a) => pairs.extend([("driver", &a.driver), ("transform", &a.transform)]),
        Command::Verify(a) => pairs.extend([("suite", &a.suite), ("source", &a.source), ("driver", &a.driver)]),
        Command::Report => {}
    }
    pairs
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
}

fn run(cli: &Cli) -> CliResult<bool> {
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            return Err(config_error("`jobs` must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| config_error(format!("worker pool: {e}")))?;
    }
    let file = match &cli.common.config {
        Some(path) => config::read(path)?,
        None => BTreeMap::new(),
    };
    let cfg = RunConfig::new(file, flags(cli));
    match cli.command {
        Command::Integrate(_) => commands::integrate::run(&cfg),
        Command::Simulate(_) => commands::simulate::run(&cfg),
        Command::Verify(_) => commands::verify::run(&cfg),
        Command::Report => commands::report::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
