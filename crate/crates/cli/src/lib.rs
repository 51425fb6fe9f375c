//! Command-line driver: `train`, `evaluate`, `simulate` and `run`.

pub mod config;
pub mod error;
pub mod evaluate;
pub mod output;
pub mod plots;
pub mod simulate;
pub mod train;

use clap::{ArgAction, Parser, Subcommand};

use crate::config::{RunArgs, RunConfig};
use crate::error::Result;
use crate::train::TrainArgs;

#[derive(Debug, Parser)]
#[command(name = "lidbench", version, about = "Language identification benchmarking over bibliographic metadata")]
pub struct Cli {
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a built-in n-gram detector
    Train(TrainArgs),
    /// Build corpora, run detectors, count confusions and time procedures
    Evaluate(RunArgs),
    /// Simulate database-scale scores from evaluation artifacts
    Simulate(RunArgs),
    /// Evaluate, then simulate
    Run(RunArgs),
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(args) => {
            let n = train::cmd_train(args)?;
            log::info!("wrote {} ({n} languages)", args.output.display());
        }
        Command::Evaluate(args) => {
            let cfg = RunConfig::resolve(args)?;
            report_evaluation(&evaluate::cmd_evaluate(&cfg)?);
        }
        Command::Simulate(args) => {
            let cfg = RunConfig::resolve(args)?;
            simulate::cmd_simulate(&cfg)?;
        }
        Command::Run(args) => {
            let cfg = RunConfig::resolve(args)?;
            report_evaluation(&evaluate::cmd_evaluate(&cfg)?);
            simulate::cmd_simulate(&cfg)?;
        }
    }
    Ok(())
}

fn report_evaluation(summary: &evaluate::EvaluateSummary) {
    log::info!("{} procedures evaluated", summary.procedures.len());
    if !summary.excluded.is_empty() {
        log::warn!("excluded detectors: {}", summary.excluded.join(", "));
    }
}
