//! `geoscale`: file-driven front end for geoscale-core.
//!
//! Exit codes: 0 success, 1 domain error (JSON object on stderr), 2 usage error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::GlobalConfig;

#[derive(Debug, Parser)]
#[command(
    name = "geoscale",
    version,
    about = "Subsampling, schedule triage, scaling fits and weak labels for remote-sensing pretraining"
)]
struct Cli {
    /// TOML file with defaults for the global options (seed, log_level, threads, output_dir).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Root seed; every stage derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides GEOSCALE_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true)]
    log_level: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rake weights over a manifest and draw nested subsets.
    Sample(commands::sample::Args),
    /// Screen warmup run logs for instability.
    Triage(commands::triage::Args),
    /// Print a warmup-stable-decay learning-rate table.
    Schedule(commands::schedule::Args),
    /// Fit a power law to scaling points.
    Fit(commands::fit::Args),
    /// Scale required to reach a target loss under a fitted law.
    Plan(commands::plan::Args),
    /// Fit the steps-versus-batch-size tradeoff.
    Batch(commands::batch::Args),
    /// Generate synthetic run logs and scaling points.
    Simulate(commands::simulate::Args),
    /// Rasterize weak labels for image chips.
    Label(commands::label::Args),
    /// Per-attribute summary of a manifest.
    Summarize(commands::summarize::Args),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Triage(_) => "triage",
            Command::Schedule(_) => "schedule",
            Command::Fit(_) => "fit",
            Command::Plan(_) => "plan",
            Command::Batch(_) => "batch",
            Command::Simulate(_) => "simulate",
            Command::Label(_) => "label",
            Command::Summarize(_) => "summarize",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let global = GlobalConfig::resolve(cli.config.as_deref(), cli.seed, cli.threads, cli.log_level.as_deref())?;
    global.init_logging();
    global.init_threads()?;
    log::debug!("seed {} threads {:?}", global.seed, global.threads);
    match cli.command {
        Command::Sample(a) => commands::sample::run(a, &global),
        Command::Triage(a) => commands::triage::run(a, &global),
        Command::Schedule(a) => commands::schedule::run(a),
        Command::Fit(a) => commands::fit::run(a, &global),
        Command::Plan(a) => commands::plan::run(a),
        Command::Batch(a) => commands::batch::run(a),
        Command::Simulate(a) => commands::simulate::run(a, &global),
        Command::Label(a) => commands::label::run(a, &global),
        Command::Summarize(a) => commands::summarize::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "command": name, "error": format!("{e:#}") });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}
