//! `edcal` command-line front end.

mod commands;
mod error;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "edcal",
    version,
    about = "Emergency-department simulation calibration"
)]
struct Cli {
    /// Worker threads for replications (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct ModelArgs {
    /// Scenario configuration JSON (default: built-in case-study scenario).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter vector JSON (default: built-in reference values).
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications and write KPI, patient-count and census tables.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write the event trace of replication 0.
        #[arg(long)]
        trace: bool,
    },
    /// Simulate one observed period from known parameters.
    GenSynthetic {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dataset CSV to write (a `.meta.json` sidecar is written next to it).
        #[arg(long)]
        out: PathBuf,
        /// Also write exam-request annotations to this CSV.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Fit the service-time parameters to an observed dataset.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Starting parameter vector JSON.
        #[arg(
            long,
            conflicts_with = "auto_start",
            required_unless_present = "auto_start"
        )]
        params: Option<PathBuf>,
        /// Build the starting point from the dataset.
        #[arg(long)]
        auto_start: bool,
        /// Exam-request annotations used by --auto-start.
        #[arg(long, requires = "auto_start")]
        annotations: Option<PathBuf>,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 3000)]
        budget: usize,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Same relative tolerance for every mean and std constraint
        /// (default: 0.35 for Green/Yellow in MU/SU, 0.2 elsewhere).
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a `simulate` output directory with an observed dataset.
    Report {
        /// Directory written by `simulate`.
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load and check inputs without running anything.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Simulate {
            model,
            reps,
            seed,
            out,
            trace,
        } => commands::simulate(&model, reps, seed, &out, trace),
        Command::GenSynthetic {
            model,
            seed,
            out,
            annotations,
        } => commands::gen_synthetic(&model, seed, &out, annotations.as_deref()),
        Command::Calibrate {
            config,
            params,
            auto_start,
            annotations,
            dataset,
            budget,
            reps,
            seed,
            tolerance,
            out,
        } => commands::calibrate(&commands::CalibrateArgs {
            config,
            params,
            auto_start,
            annotations,
            dataset,
            budget,
            reps,
            seed,
            tolerance,
            out,
        }),
        Command::Report { sim, dataset, out } => commands::report(&sim, &dataset, &out),
        Command::Validate { model, dataset } => commands::validate(&model, dataset.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(e.code())
        }
    }
}
