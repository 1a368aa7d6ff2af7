//! `tengrid`: synthesize, mask, tensorize, complete and evaluate tensors.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Task};
use crate::error::{CliError, Result};

/// Tensor-grid completion experiments.
///
/// Settings come from an optional JSON `--config` file; flags override it.
/// Exit codes: 0 success, 2 invalid settings, 3 numerical failure, 4 I/O
/// failure. `TENGRID_THREADS` caps the worker threads.
#[derive(Parser)]
#[command(name = "tengrid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a low-rank tensor (grid or train) or a synthetic image.
    Synth(Invocation),
    /// Write a uniform random or text-image observation mask.
    Mask(Invocation),
    /// Turn an image or frame stack into a tensor, or back with --inverse.
    Tensorize(Invocation),
    /// Fill in the unobserved entries of a tensor.
    Complete(Invocation),
    /// Compare an estimate with a reference (RE, PSNR, optional SSIM).
    Eval(Invocation),
}

#[derive(Args)]
struct Invocation {
    /// JSON experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: ExperimentConfig,
}

fn settings(task: Task, inv: Invocation) -> Result<ExperimentConfig> {
    let base = match &inv.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(named) = base.task {
        if named != task {
            return Err(CliError::config(format!(
                "config is for task {named:?}, not {task:?}"
            )));
        }
    }
    Ok(base.merged(inv.flags))
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("TENGRID_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("TENGRID_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, inv) = match cli.command {
        Command::Synth(i) => (Task::Synth, i),
        Command::Mask(i) => (Task::Mask, i),
        Command::Tensorize(i) => (Task::Tensorize, i),
        Command::Complete(i) => (Task::Complete, i),
        Command::Eval(i) => (Task::Eval, i),
    };
    let result = init_threads()
        .and_then(|_| settings(task, inv))
        .and_then(|cfg| commands::run(task, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tengrid: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
