use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use autonomy_lab::experiments::{emit_plot_data, parse_config, run_experiment, ExperimentId};

/// Log verbosity, e.g. `AUTONOMY_LAB_LOG=debug`.
const LOG_ENV: &str = "AUTONOMY_LAB_LOG";

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "autonomy-lab", version, about = "Seeded agent/environment experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Master seed. Required: runs never draw from the clock.
    #[arg(long)]
    seed: u64,
    /// Overrides the config's step budget where it has one.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Coupled ECA runs written as trace CSVs.
    EcaRun(RunArgs),
    /// Embedded machines against direct simulation.
    EmbedCheck(RunArgs),
    /// Predictor accuracy and efficiency over horizons.
    PredictSweep(RunArgs),
    /// Compressed trajectory length against time.
    ComplexitySweep(RunArgs),
    /// Bounded halting search over every 2-state 2-symbol machine.
    HaltingSweep(RunArgs),
    /// Autonomy conditions and information measures per agent.
    AutonomyReport(RunArgs),
    /// Wide CSV tables for plotting from a finished run.
    EmitPlotData {
        /// Output directory of a completed run.
        results: PathBuf,
    },
}

fn run(id: ExperimentId, args: RunArgs) -> ExitCode {
    let config = match parse_config(&args.config) {
        Ok(c) if c.id() == id => c,
        Ok(c) => {
            error!("{} holds a {} config, not {id}", args.config.display(), c.id());
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let config = match args.budget.map(|b| config.clone().with_budget(b)).unwrap_or(Ok(config)) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run_experiment(&config, &args.out, args.seed) {
        Ok(m) => {
            for o in &m.outputs {
                println!("{}  {}", o.sha256, o.file);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::EcaRun(a) => run(ExperimentId::EcaRun, a),
        Command::EmbedCheck(a) => run(ExperimentId::EmbedCheck, a),
        Command::PredictSweep(a) => run(ExperimentId::PredictSweep, a),
        Command::ComplexitySweep(a) => run(ExperimentId::ComplexitySweep, a),
        Command::HaltingSweep(a) => run(ExperimentId::HaltingSweep, a),
        Command::AutonomyReport(a) => run(ExperimentId::AutonomyReport, a),
        Command::EmitPlotData { results } => match emit_plot_data(&results) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                error!("{e}");
                ExitCode::from(EXIT_RUNTIME)
            }
        },
    }
}
