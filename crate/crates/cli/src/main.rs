//! `hseg`: hierarchical segment explanations from the command line.

mod commands;
mod config;
mod dataset;
mod error;
mod mock_model;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hseg", version, about = "Hierarchical segment-based explanations for image classifiers")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Explain one image; writes explanation.json and attribution.png.
    Explain {
        /// JSON file with the same keys as the flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Run the metric battery over a dataset; writes metrics.csv and summary.json.
    Evaluate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Redraw the attribution map of a saved explanation.
    Render {
        #[arg(long)]
        explanation: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Segment counts for several minimum segment sizes.
    SweepTheta {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Serve a built-in mock classifier over stdin/stdout (for `exec:` endpoints).
    MockModel(mock_model::MockArgs),
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Explain { config, run } => commands::explain(&commands::resolve(config.as_ref(), run)?),
        Command::Evaluate { config, run } => commands::evaluate(&commands::resolve(config.as_ref(), run)?),
        Command::Render {
            explanation,
            config,
            run,
        } => commands::render(&commands::resolve(config.as_ref(), run)?, &explanation),
        Command::SweepTheta { config, run } => commands::sweep_theta(&commands::resolve(config.as_ref(), run)?),
        Command::MockModel(args) => commands::serve_mock(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
