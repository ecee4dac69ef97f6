use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use gpfree_core::cache::CacheStore;
use gpfree_core::{Parallelism, SolverConfig};

mod commands;
mod output;

use output::{Format, OutputSpec};

/// Exact geometric-progression-free subset counts and their limit constants.
#[derive(Debug, Parser)]
#[command(name = "gpfree", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Decimal digits when rendering rationals.
    #[arg(long, global = true, default_value_t = 12)]
    precision: usize,
    /// Directory holding cached r_k tables.
    #[arg(long, global = true, env = "GPFREE_CACHE_DIR")]
    cache: Option<PathBuf>,
    /// Search node budget for extending r_k tables.
    #[arg(long, global = true, default_value_t = 10_000_000_000)]
    budget: u64,
    /// Run every computation on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate r_k(l) with extremal witnesses.
    Rk(commands::RkArgs),
    /// Evaluate g_k^(s)(n) by the chain formula.
    G(commands::GArgs),
    /// Exact partial sum and tail bound for the limit constant.
    Theta(commands::ThetaArgs),
    /// Base-s digits of the limit constant.
    Digits(commands::DigitsArgs),
    /// Gap statistics of u_m = min r_k^-1(m).
    Gaps(commands::GapsArgs),
    /// g_k^(s)(n)/n against the constant's enclosure.
    Convergence(commands::ConvergenceArgs),
    /// Compare g_k^(s) and g_k^(s') for n = 1..nmax.
    Compare(commands::CompareArgs),
    /// Brute-force maximum avoiding progressions with ratio a power of any listed base.
    Multi(commands::MultiArgs),
}

pub struct Session {
    pub out: OutputSpec,
    pub store: CacheStore,
    pub solver: SolverConfig,
}

impl Session {
    pub fn parallelism(&self) -> Parallelism {
        self.solver.parallelism
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    let ctx = Session {
        out: OutputSpec::new(g.format, g.output, g.precision)?,
        store: CacheStore::resolve(g.cache),
        solver: SolverConfig {
            node_budget: Some(g.budget),
            parallelism: if g.sequential {
                Parallelism::Sequential
            } else {
                Parallelism::Parallel
            },
        },
    };
    match cli.command {
        Command::Rk(a) => commands::rk(&ctx, a),
        Command::G(a) => commands::g(&ctx, a),
        Command::Theta(a) => commands::theta(&ctx, a),
        Command::Digits(a) => commands::digits(&ctx, a),
        Command::Gaps(a) => commands::gaps(&ctx, a),
        Command::Convergence(a) => commands::convergence(&ctx, a),
        Command::Compare(a) => commands::compare(&ctx, a),
        Command::Multi(a) => commands::multi(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            match err.downcast_ref::<gpfree_core::Error>() {
                Some(gpfree_core::Error::BudgetExhausted { .. }) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
