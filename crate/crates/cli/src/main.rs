//! `plume`: run scenarios, sweep parameters, validate invariants and plot
//! logs.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod output;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "plume", version, about = "Concentration level-curve tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write log.csv and metrics.json.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Cartesian product of parameter values.
    Sweep {
        scenario: PathBuf,
        /// `dotted.path=v1,v2,...`; repeat for more parameters.
        #[arg(long = "set", value_name = "KEY=V1,V2", required = true)]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render a run log as SVG.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Reference level; taken from --scenario when omitted.
        #[arg(long)]
        c0: Option<f64>,
        /// Scenario of the run, used for the plume source path and c0.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Validate {
        #[arg(long, hide = true)]
        use_printed_inverse: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PlotKind {
    TrajectoryXy,
    ConcentrationTimeseries,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PLUME_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, seed } => commands::run::execute(&scenario, &out, seed),
        Command::Sweep { scenario, set, out, jobs } => commands::sweep::execute(&scenario, &set, &out, jobs),
        Command::Plot {
            kind,
            log,
            out,
            c0,
            scenario,
        } => commands::plot::execute(kind, &log, &out, c0, scenario.as_deref()),
        Command::Validate { use_printed_inverse } => commands::validate::execute(use_printed_inverse),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
