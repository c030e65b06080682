//! Experiment harness for the `synch-em` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;

use clap::{Parser, Subcommand};

pub use commands::Study;
pub use config::{ExperimentConfig, Method, Model, Overrides};
pub use error::{categorize, Category, CliError};

/// Relative `output` directories are resolved under this directory when set.
pub const OUTPUT_ROOT_ENV: &str = "SYNCHEM_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "synch-em", version, about = "Synchronization-accelerated EM experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write seeded datasets, one container per SNR point and trial.
    Generate {
        #[command(flatten)]
        overrides: Overrides,
        /// Also write long-format CSV copies.
        #[arg(long)]
        csv: bool,
    },
    /// Learn the synchronization-error prior at every SNR point.
    LearnPrior {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one method over all SNR points and trials.
    Run {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        method: Method,
    },
    /// Run every configured method over the SNR grid and aggregate.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Emit an SVG derived from the summary CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Statistical studies on 1-D data.
    Analyze {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        study: Study,
        #[arg(long)]
        plot: bool,
    },
}

pub fn execute(cli: Cli) -> anyhow::Result<Vec<std::path::PathBuf>> {
    use commands::Session;
    match cli.command {
        Command::Generate { overrides, csv } => {
            commands::generate(Session::new("generate", ExperimentConfig::resolve(&overrides)?)?, csv)
        }
        Command::LearnPrior { overrides } => {
            commands::learn_prior(Session::new("learn-prior", ExperimentConfig::resolve(&overrides)?)?)
        }
        Command::Run { overrides, method } => {
            commands::run(Session::new("run", ExperimentConfig::resolve(&overrides)?)?, method)
        }
        Command::Sweep { overrides, plot } => {
            commands::sweep(Session::new("sweep", ExperimentConfig::resolve(&overrides)?)?, plot)
        }
        Command::Analyze { overrides, study, plot } => {
            commands::analyze(Session::new("analyze", ExperimentConfig::resolve(&overrides)?)?, study, plot)
        }
    }
}
