//! Experiment driver: batch simulations, the fixed-split grid benchmark,
//! PPO training/evaluation, and the reward-sweep report, all emitting
//! plot-ready CSV. Every output is regenerable byte-for-byte from the same
//! manifest and master seed.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on validation failure.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "twinsim", version, about = "Edge-twin resource-split experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct SharedArgs {
    /// Scenario/reward configuration file (flat TOML). Defaults apply when
    /// omitted.
    #[arg(long)]
    config: Option<String>,
    /// Master seed; defaults to the config's `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: String,
    /// Episodes per evaluation.
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    /// Steps per episode.
    #[arg(long, default_value_t = 100)]
    horizon: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run fixed-split or checkpoint-policy episodes and write per-episode
    /// and per-step metrics.
    Simulate {
        #[command(flatten)]
        shared: SharedArgs,
        /// Fixed split "comm,comp" with both fractions in [0, 1].
        #[arg(long)]
        split: Option<String>,
        /// Policy checkpoint to drive the episodes instead.
        #[arg(long)]
        checkpoint: Option<String>,
        /// Also export the event trace and completion ledger.
        #[arg(long, default_value_t = false)]
        trace: bool,
    },
    /// Exhaustive fixed-split benchmark over a fraction grid.
    Grid {
        #[command(flatten)]
        shared: SharedArgs,
        /// Comma-separated split fractions; defaults to 0,0.1,...,1.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Train one PPO policy and write a checkpoint plus the training log.
    Train {
        #[command(flatten)]
        shared: SharedArgs,
        /// Synchronization discount factor, in (0, 1).
        #[arg(long, default_value_t = 0.9)]
        eta: f64,
        /// Delay penalty per late request, at most 0.
        #[arg(long, default_value_t = 0.0)]
        penalty: f64,
        /// Environment-step training budget.
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
    },
    /// Evaluate a checkpoint policy deterministically over the shared seed
    /// schedule.
    Eval {
        #[command(flatten)]
        shared: SharedArgs,
        #[arg(long)]
        checkpoint: String,
    },
    /// Train a policy per reward setting, evaluate all of them against the
    /// grid benchmark, and emit the combined trade-off report.
    Report {
        #[command(flatten)]
        shared: SharedArgs,
        /// Sweep points "eta:penalty,..." - defaults to the two tuning
        /// phases (penalty 0 then -1, eta 0.9 down to 0.4, labels A..L).
        #[arg(long)]
        sweep: Option<String>,
        /// Environment-step training budget per sweep point.
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { shared, split, checkpoint, trace } => {
            commands::simulate(&shared, split.as_deref(), checkpoint.as_deref(), trace)
        }
        Command::Grid { shared, grid } => commands::grid(&shared, grid.as_deref()),
        Command::Train { shared, eta, penalty, steps } => {
            commands::train(&shared, eta, penalty, steps)
        }
        Command::Eval { shared, checkpoint } => commands::eval(&shared, &checkpoint),
        Command::Report { shared, sweep, steps } => {
            commands::report(&shared, sweep.as_deref(), steps)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::AppError::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(commands::AppError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
