use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::{CommandFactory, Parser, Subcommand};
use relstate_cli::commands;
use relstate_cli::{Format, Report};

/// Optimal estimation of the overlap between two unknown pure states.
#[derive(Debug, Parser)]
#[command(name = "relstate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Random seed for simulations and optimizer restarts.
    #[arg(long, global = true, env = "RELSTATE_SEED", default_value_t = 0)]
    seed: u64,

    /// Monte Carlo shots (default 1000000).
    #[arg(long, global = true)]
    shots: Option<u64>,

    /// Number of doublet-block outcomes for `antiparallel`.
    #[arg(long, global = true, default_value_t = 2)]
    outcomes: usize,

    /// Optimizer tolerance for `antiparallel`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every cell of the published minimal-variance table.
    Table,
    /// Minimal variance and optimal guesses for N copies against M >= N copies.
    Variance { n: u32, m: u32 },
    /// One copy of each of two qudits of dimension D.
    Qudit { d: u32 },
    /// One qubit against a perfectly known reference.
    Asymptotic,
    /// Optimize the POVM for an orthogonal qubit pair against one qubit.
    Antiparallel,
    /// Monte Carlo check of the optimal measurement.
    Simulate {
        #[arg(required_unless_present = "antiparallel")]
        n: Option<u32>,
        #[arg(required_unless_present = "antiparallel")]
        m: Option<u32>,
        /// Simulate the orthogonal-pair optimum instead.
        #[arg(long, conflicts_with_all = ["n", "m"])]
        antiparallel: bool,
        /// Task groups for scheduling (0 = one per chunk); never changes results.
        #[arg(long, default_value_t = 0)]
        shards: usize,
    },
    /// Cross-check closed forms against independent evaluations.
    Oracle {
        #[command(subcommand)]
        target: OracleTarget,
    },
}

#[derive(Debug, Subcommand)]
enum OracleTarget {
    /// Qudit moments against permutation-operator traces (d = 2, 3, 4).
    Permutation { d: Option<u32> },
    /// One moment I_k^alpha against its Monte Carlo estimate.
    Moment { n: u32, m: u32, k: u32, alpha: u32 },
    /// Block-operator moment coefficients for the orthogonal pair.
    Blocks,
    /// Parallel moments against dense projector traces (all N <= M <= 3 by default).
    Dense {
        #[arg(requires = "m")]
        n: Option<u32>,
        m: Option<u32>,
    },
}

const DEFAULT_SHOTS: u64 = 1_000_000;

fn run(cli: &Cli) -> Result<Report> {
    let shots = cli.shots.unwrap_or(DEFAULT_SHOTS);
    match &cli.command {
        Command::Table => commands::table(),
        Command::Variance { n, m } => commands::variance(*n, *m),
        Command::Qudit { d } => commands::qudit(*d),
        Command::Asymptotic => commands::asymptotic(),
        Command::Antiparallel => commands::antiparallel(cli.outcomes, cli.seed, cli.tol),
        Command::Simulate {
            antiparallel: true,
            shards,
            ..
        } => commands::simulate_antiparallel(shots, cli.seed, *shards),
        Command::Simulate { n, m, shards, .. } => commands::simulate(
            n.expect("required by clap"),
            m.expect("required by clap"),
            shots,
            cli.seed,
            *shards,
        ),
        Command::Oracle { target } => match target {
            OracleTarget::Permutation { d } => match d {
                Some(d) => commands::oracle_permutation(&[*d]),
                None => commands::oracle_permutation(&[2, 3, 4]),
            },
            OracleTarget::Moment { n, m, k, alpha } => {
                commands::oracle_moment(*n, *m, *k, *alpha, shots, cli.seed)
            }
            OracleTarget::Blocks => commands::oracle_blocks(),
            OracleTarget::Dense { n, m } => match (n, m) {
                (Some(n), Some(m)) => commands::oracle_dense(&[(*n, *m)]),
                _ => {
                    let pairs: Vec<(u32, u32)> =
                        (1..=3).flat_map(|m| (1..=m).map(move |n| (n, m))).collect();
                    commands::oracle_dense(&pairs)
                }
            },
        },
    }
}

/// Invalid arguments that only the library can detect count as usage errors.
fn is_usage_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<relstate::Error>(),
        Some(relstate::Error::Argument(_) | relstate::Error::Domain(_))
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = run(&cli).and_then(|report| Ok((report.render(cli.format)?, report.passed())));
    match outcome {
        Ok((text, passed)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification mismatch");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage_error(&e) {
                eprintln!("{}", Cli::command().render_usage());
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
