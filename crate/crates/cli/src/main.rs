//! `pce`: orthogonal bases, quadrature rules, Galerkin tensors and the two
//! polynomial chaos applications from the command line.
//!
//! Every subcommand reads an optional JSON spec (`--spec`), applies
//! `--set key=value` overrides on top of it and writes artifacts named after
//! `--out`. Log verbosity is controlled by `PCE_LOG` (e.g. `PCE_LOG=info`).

mod commands;
mod output;
mod spec;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "pce", version, about = "Polynomial chaos toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON spec for the subcommand; defaults apply to missing fields.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Output path prefix; artifacts get `.csv`/`.json` style suffixes.
    /// Defaults to the subcommand name.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for Monte Carlo sampling.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Override a spec field, e.g. `--set n=4` or `--set parameters.lambda=0`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Recurrence coefficients and monic polynomials of a measure.
    Basis,
    /// Quadrature nodes and weights for a measure.
    Quad {
        /// gauss, radau, lobatto, fejer1, fejer2 or cc.
        #[arg(long)]
        rule: Option<String>,
        /// Number of nodes.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Nonzero scalar products of basis polynomials.
    Tensor {
        #[arg(long)]
        order: Option<usize>,
    },
    /// Galerkin propagation of the Van de Vusse reactor.
    Propagate,
    /// Chance-constrained stochastic optimal control.
    Ocp,
    /// Construction timings for the example configurations.
    Bench {
        /// Repetitions per timing (default 10000).
        #[arg(long)]
        reps: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Basis => "basis",
            Command::Quad { .. } => "quad",
            Command::Tensor { .. } => "tensor",
            Command::Propagate => "propagate",
            Command::Ocp => "ocp",
            Command::Bench { .. } => "bench",
        }
    }

    /// Subcommand flags as spec overrides; they win over `--set`.
    fn overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Command::Quad { rule, n } => {
                out.extend(rule.as_ref().map(|r| format!("rule={r}")));
                out.extend(n.map(|n| format!("n={n}")));
            }
            Command::Tensor { order } => out.extend(order.map(|o| format!("order={o}"))),
            Command::Bench { reps } => out.extend(reps.map(|r| format!("reps={r}"))),
            _ => {}
        }
        out
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PCE_LOG", "warn")).init();
    let cli = Cli::parse();
    let mut overrides = cli.overrides;
    overrides.extend(cli.command.overrides());
    let ctx = commands::Context {
        spec: cli.spec,
        out: cli.out.unwrap_or_else(|| PathBuf::from(cli.command.name())),
        seed: cli.seed,
        overrides,
    };
    let result = match cli.command {
        Command::Basis => commands::basis(&ctx),
        Command::Quad { .. } => commands::quad(&ctx),
        Command::Tensor { .. } => commands::tensor(&ctx),
        Command::Propagate => commands::propagate(&ctx),
        Command::Ocp => commands::ocp(&ctx),
        Command::Bench { .. } => commands::bench(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
