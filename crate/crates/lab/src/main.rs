use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roughn_lab::{run, RunConfig};

#[derive(Parser)]
#[command(
    name = "roughn-lab",
    version,
    about = "Deterministic experiments on integers whose shifts have few prime factors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Parameter file with `key = value` lines.
    #[arg(long, global = true)]
    params: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for every randomized step; ROUGHN_LAB_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Seconds between periodic checkpoints (0 disables them).
    #[arg(long = "checkpoint-secs", global = true, default_value_t = 60)]
    checkpoint_secs: u64,

    /// Continue from a checkpoint file.
    #[arg(long, global = true)]
    resume: Option<PathBuf>,

    /// Stop with a checkpoint after this many work units.
    #[arg(long = "max-units", global = true, hide = true)]
    max_units: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the weight table and write weights.csv.
    SieveScan,
    /// Sample from the weighted measure and compare divisibility frequencies.
    Sample,
    /// Exact moments, Chebyshev tails, union bounds and combinatorial checks.
    Moments,
    /// The normalization constant of the bump by two quadrature routes.
    C0,
    /// Check the divisibility axioms on the weight table.
    Axioms,
    /// Gap statistics of a Bernoulli random model.
    CramerGaps,
    /// Exact counts of integers with k distinct prime factors.
    Pik,
    /// Search short windows for integers with many prime factors.
    WindowSearch,
    /// Search for shifts with many distinct prime factors below n.
    #[command(name = "refute-679")]
    Refute679,
    /// Find the support point with the smallest record score.
    RecordSearch,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SieveScan => "sieve-scan",
            Command::Sample => "sample",
            Command::Moments => "moments",
            Command::C0 => "c0",
            Command::Axioms => "axioms",
            Command::CramerGaps => "cramer-gaps",
            Command::Pik => "pik",
            Command::WindowSearch => "window-search",
            Command::Refute679 => "refute-679",
            Command::RecordSearch => "record-search",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match std::env::var("ROUGHN_LAB_SEED") {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(s) => s,
            Err(_) => {
                eprintln!("error: ROUGHN_LAB_SEED={v:?} is not a u64");
                return ExitCode::from(2);
            }
        },
        Err(_) => cli.seed,
    };
    let config = RunConfig {
        subcommand: cli.command.name().to_string(),
        params_path: cli.params,
        out_dir: cli.out,
        seed,
        workers: cli.workers,
        checkpoint_secs: cli.checkpoint_secs,
        resume: cli.resume,
        max_units: cli.max_units,
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
