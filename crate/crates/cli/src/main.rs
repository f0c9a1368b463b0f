//! `fracdyn`: Caputo derivatives, fractional Euler-Lagrange derivations,
//! model simulation and verification sweeps from the command line.

mod commands;
mod config;
mod csvio;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "fracdyn", version, about = "Caputo fractional calculus and fractional variational models")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command. Flags override config-file values.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Fractional order; 1 selects the classical routines.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Discount rate.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Kernel orientation for `caputo`.
    #[arg(long = "order-side", value_enum, global = true)]
    pub order_side: Option<Side>,
    /// Grid step, decimal or fraction (for example 1/256).
    #[arg(long = "grid-step", global = true)]
    pub grid_step: Option<String>,
    /// Integration horizon.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Seed for randomized verification.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Use D_K phi instead of D_I phi in the investment condition.
    #[arg(long = "strict-paper", global = true)]
    pub strict_paper: bool,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Brackets,
    Limits,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Caputo derivative of a tabulated function (two-column CSV `t,f`).
    Caputo { input: PathBuf },
    /// Mittag-Leffler values at the given arguments, or the discount factor
    /// E_a(-rho t^a) on the grid when no argument is given.
    Ml {
        #[arg(allow_negative_numbers = true)]
        z: Vec<f64>,
    },
    /// Solves D^a x = f(t, x) for polynomial right-hand sides.
    Solve {
        /// One right-hand side per component, in the polynomial grammar.
        #[arg(long = "rhs", required = true, allow_hyphen_values = true)]
        rhs: Vec<String>,
        /// Initial values, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        x0: Vec<f64>,
    },
    /// Derives the fractional Euler-Lagrange equations of a Lagrangian.
    Derive {
        #[arg(long, allow_hyphen_values = true)]
        lagrangian: String,
        /// Constraint F(x, y) = 0 handled with a multiplier.
        #[arg(long, conflicts_with = "accumulation", allow_hyphen_values = true)]
        constraint: Option<String>,
        /// Accumulation law phi(K, I, N) of the investment model; the
        /// Lagrangian is then the payoff L1(K, I, N).
        #[arg(long, allow_hyphen_values = true)]
        accumulation: Option<String>,
    },
    /// Runs a model described by a key = value config file.
    Simulate { config: PathBuf },
    /// Runs a verification suite and prints a JSON report.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long = "alpha-list", value_delimiter = ',')]
        alpha_list: Vec<f64>,
        /// Random points per order for the geometry suite.
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Runs a configured model for each order in a list.
    SweepAlpha {
        config: PathBuf,
        #[arg(long = "alpha-list", value_delimiter = ',', required = true)]
        alpha_list: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let res = match &cli.command {
        Command::Caputo { input } => commands::caputo::run(c, input),
        Command::Ml { z } => commands::ml::run(c, z),
        Command::Solve { rhs, x0 } => commands::solve::run(c, rhs, x0),
        Command::Derive { lagrangian, constraint, accumulation } => {
            commands::derive::run(c, lagrangian, constraint.as_deref(), accumulation.as_deref())
        }
        Command::Simulate { config } => commands::simulate::run(c, config),
        Command::Verify { suite, alpha_list, points } => commands::verify::run(c, *suite, alpha_list, *points),
        Command::SweepAlpha { config, alpha_list } => commands::sweep::run(c, config, alpha_list),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        // the reader went away (for example `| head`); nothing left to report
        Err(error::CliError::Runtime(m)) if m == error::BROKEN_PIPE => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracdyn: {e}");
            ExitCode::from(e.code())
        }
    }
}
