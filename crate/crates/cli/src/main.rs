//! `jm-uplink`: command-line front end for the uplink analyzer and simulator.
//!
//! Usage: `jm-uplink <area|coverage|se|pcf|validate> [--scenario FILE]
//! [--seed N] [--out DIR]`. Scenarios are JSON files (see
//! [`scenario::Scenario`]); without one the built-in reference scenario
//! runs. Artifacts land in the output directory, JSON for models and
//! reports, CSV for curves. Failures print a machine-readable JSON object
//! to stderr and exit nonzero. The `JM_UPLINK_THREADS` environment variable
//! caps the simulation worker threads (default: all hardware threads).

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jm_uplink_core::Error;

use scenario::Scenario;

/// Environment variable capping the Monte Carlo worker-thread count.
const THREADS_ENV: &str = "JM_UPLINK_THREADS";

#[derive(Debug, thiserror::Error)]
enum CliError {
    /// The scenario file or an environment setting is unusable.
    #[error("{0}")]
    Scenario(String),
    /// Analysis or simulation failure from the core library.
    #[error(transparent)]
    Core(#[from] Error),
    /// Filesystem failure while writing artifacts.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Stable machine-readable failure category.
    fn kind(&self) -> &'static str {
        match self {
            CliError::Scenario(_) => "InvalidScenario",
            CliError::Io(_) => "Io",
            CliError::Core(e) => match e {
                Error::NonConvergence(_) => "NonConvergence",
                Error::NoRoot(_) => "NoRoot",
                Error::WindowTooSmall { .. } => "WindowTooSmall",
                Error::RejectionBudgetExceeded { .. } => "RejectionBudgetExceeded",
                Error::InvalidMoments(_) => "InvalidMoments",
                Error::InvalidShape { .. } => "InvalidShape",
                Error::DivergentMoment(_) => "DivergentMoment",
                Error::Domain { .. } => "Domain",
                Error::NoInterferers => "NoInterferers",
                Error::InvalidParameter(_) => "InvalidParameter",
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "jm-uplink",
    version,
    about = "Uplink analysis and simulation for networks with users tied to bounded station cells"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario JSON file (defaults to the built-in reference scenario).
    #[arg(long, global = true, value_name = "FILE")]
    scenario: Option<PathBuf>,
    /// Override the scenario's master seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory, created if missing (defaults to the scenario's
    /// output_path, then the current directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the cell-area model and compare it against simulated areas.
    Area,
    /// Coverage probability across the configured SIR thresholds.
    Coverage,
    /// Spectral-efficiency sweep across the cell-range grid.
    Se,
    /// Pair correlation of interfering users: closed form vs simulation.
    Pcf,
    /// Run the self-validation suite and report per-criterion results.
    Validate,
}

/// Apply `JM_UPLINK_THREADS` to the global worker pool before any
/// simulation runs. Absent means one worker per hardware thread.
fn init_threads() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let parsed = raw
        .to_str()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0);
    let Some(n) = parsed else {
        return Err(CliError::Scenario(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        )));
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Scenario(format!("cannot size the worker pool: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    init_threads()?;
    let mut scenario = match &cli.scenario {
        Some(path) => Scenario::load(path).map_err(CliError::Scenario)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| scenario.output_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;

    match cli.command {
        Command::Area => commands::cmd_area(&scenario, &out).map(|()| true),
        Command::Coverage => commands::cmd_coverage(&scenario, &out).map(|()| true),
        Command::Se => commands::cmd_se(&scenario, &out).map(|()| true),
        Command::Pcf => commands::cmd_pcf(&scenario, &out).map(|()| true),
        Command::Validate => commands::cmd_validate(&scenario, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
