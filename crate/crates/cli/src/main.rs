use std::process::ExitCode;

use clap::{Parser, Subcommand};
use confnet::commands::{
    cmd_classify, cmd_hk, cmd_montecarlo, cmd_presets, cmd_run, ClassifyArgs, HkArgs, MonteCarloArgs,
};
use confnet::config::SimArgs;

/// Opinion, confidence-network and asset-price simulations.
#[derive(Debug, Parser)]
#[command(name = "confnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One realization: trajectory CSV and summary JSON.
    Run(SimArgs),
    /// Ensemble from a shared initial profile.
    Montecarlo(MonteCarloArgs),
    /// Essential / inessential classes of a confidence structure.
    Classify(ClassifyArgs),
    /// Standalone bounded-confidence runs and radius sweeps.
    Hk(HkArgs),
    /// List the named experiments.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Hk(a) => cmd_hk(a),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("confnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
