//! `secluded`: audits, constructions, roundings and bound tables from the
//! command line.
//!
//! Exit codes: 0 when every checked claim holds, 1 when a checked claim is
//! violated (the report is still written), 2 for usage or input errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "secluded",
    version,
    about = "Secluded unit-cube partitions and the rounding schemes they induce"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Worker threads; changes wall time only, never results.
    #[arg(long, global = true, env = "SECLUDED_THREADS")]
    pub threads: Option<usize>,
    /// Accept float literals such as 1e-3, converted exactly as dyadic rationals.
    #[arg(long, global = true)]
    pub allow_inexact: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Round a point with the universal scheme or a custom one.
    Round(commands::RoundArgs),
    /// Distinct rounded values over the ε₀-ball around a point.
    OutputSet(commands::RoundArgs),
    /// Largest number of members any ε-ball meets.
    Audit(commands::AuditArgs),
    /// A point whose open ε-ball meets at least ⌈(1+2ε)^d⌉ members.
    Witness(commands::WitnessArgs),
    /// Glued layered construction for a dimension and block size.
    Construct(commands::ConstructArgs),
    /// Depth decomposition and pigeonhole witness of a box family.
    Depth(commands::DepthArgs),
    /// Rich point of a grid coloring of the unit cube.
    Sperner(commands::SpernerArgs),
    /// Degree and tolerance bounds.
    Bounds(commands::BoundsArgs),
    /// Adversarial transversal and the collapse it forces on a rounding scheme.
    NflDemo(commands::NflArgs),
}

/// What a successful run concluded.
pub enum Verdict {
    Holds,
    Violated,
}

fn run(cli: Cli) -> Result<Verdict> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    commands::execute(&cli.global, &cli.command)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Verdict::Holds) => ExitCode::SUCCESS,
        Ok(Verdict::Violated) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
