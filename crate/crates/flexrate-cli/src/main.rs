//! `flexrate` — expected-rate analysis of mmWave links under self-body
//! blockage across 5G NR numerologies and scheduling intervals.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use commands::CliError;
use flexrate_core::rate::RateMode;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "flexrate",
    version,
    about = "Expected data rate of a mmWave link under self-body blockage, per 5G NR numerology and scheduling interval"
)]
struct Cli {
    /// JSON run configuration; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Monte-Carlo seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo trial-count override.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Rate metric used for ranking and recommendation flags.
    #[arg(long, global = true, value_enum, default_value_t = RateModeArg::TimeAvg)]
    rate_mode: RateModeArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateModeArg {
    /// Expected rate per slot (aggregate divided by the slot count).
    TimeAvg,
    /// Aggregate expected rate over the whole scheduling interval.
    Aggregate,
}

impl From<RateModeArg> for RateMode {
    fn from(v: RateModeArg) -> Self {
        match v {
            RateModeArg::TimeAvg => RateMode::TimeAveraged,
            RateModeArg::Aggregate => RateMode::Aggregate,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one (environment, scenario, distance, mu, tau) point and
    /// print it as a CSV row.
    Evaluate {
        /// Environment name from the configuration (e.g. office, car_park).
        #[arg(long)]
        env: String,
        /// Scenario name from the configuration (e.g. hand, pocket).
        #[arg(long)]
        scenario: String,
        /// Horizontal AP-to-UE distance in metres.
        #[arg(long)]
        distance: f64,
        /// Numerology index.
        #[arg(long)]
        mu: u8,
        /// Scheduling interval in milliseconds.
        #[arg(long)]
        tau_ms: f64,
    },
    /// Emit the sweep CSVs: fig4.csv (one interval, all environments) and
    /// fig5.csv (interval comparison).
    Sweep,
    /// Rank all candidates per scenario cell and compare with the embedded
    /// reference recommendations.
    Recommend,
    /// Run the numerical cross-check suite.
    Validate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.mc.trials = trials;
    }
    let resolved = cfg.resolve()?;
    let mode: RateMode = cli.rate_mode.into();
    let mut stdout = std::io::stdout().lock();

    match cli.command {
        Command::Evaluate {
            env,
            scenario,
            distance,
            mu,
            tau_ms,
        } => commands::cmd_evaluate(
            &resolved,
            &env,
            &scenario,
            distance,
            mu,
            tau_ms,
            mode,
            &mut stdout,
        ),
        Command::Sweep => commands::cmd_sweep(&resolved, &cli.out, mode),
        Command::Recommend => commands::cmd_recommend(&resolved, &cli.out, mode, &mut stdout),
        Command::Validate => commands::cmd_validate(&resolved, &mut stdout),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}
