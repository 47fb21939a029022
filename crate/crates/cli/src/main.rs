//! `sepals` — extreme partial least squares from the command line.
//!
//! Subcommands: `simulate` (draw a dataset from the Pareto/Clayton model),
//! `fit` (single direction estimate with an optional shrinkage prior),
//! `sweep` (Monte Carlo similarity curves over (hyperparameter, k) grids),
//! `tail` (Hill plot, QQ plot and histogram data) and `tailcorr`
//! (conditional tail correlation curves with grid-argmax selection).
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 numerical degeneracy (with a
//! machine-readable JSON object on stderr).

mod args;
mod commands;
mod errors;
mod ioutil;

use clap::{Parser, Subcommand};

use args::{FitArgs, SimulateArgs, SweepArgs, TailArgs, TailcorrArgs};

#[derive(Parser)]
#[command(name = "sepals", version, about = "Extreme partial least squares with shrinkage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset from the heavy-tailed single-index model
    Simulate(SimulateArgs),
    /// Fit the extreme PLS direction, optionally with a shrinkage prior
    Fit(FitArgs),
    /// Monte Carlo sweep of similarity against the true direction
    Sweep(SweepArgs),
    /// Heavy-tail diagnostics: Hill plot, QQ plot, histogram
    Tail(TailArgs),
    /// Conditional tail correlations of the fitted projection
    Tailcorr(TailcorrArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Fit(args) => commands::cmd_fit(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
        Command::Tail(args) => commands::cmd_tail(args),
        Command::Tailcorr(args) => commands::cmd_tailcorr(args),
    };
    if let Err(err) = outcome {
        std::process::exit(err.report());
    }
}
