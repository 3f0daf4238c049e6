//! `medlab`: command-line front end for finite median algebras.
//!
//! Reports are JSON on stdout. Exit codes: 0 success (a non-cube is a
//! result, not a failure), 1 domain error, 2 malformed input or usage.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "medlab", version, about = "Finite median algebras and balanced measures")]
struct Cli {
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true, value_name = "J")]
    jobs: Option<usize>,
    /// Also print a human-readable summary to stderr.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = 100)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Snap weights to multiples of 2^-J (default: ambient dimension + 2).
    #[arg(long, value_name = "J")]
    denominator_log2: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Load an algebra file and check it.
    Validate { algebra: PathBuf },
    /// List the walls of an algebra.
    Walls { algebra: PathBuf },
    /// Decide whether an algebra, or a subset of it, is a cube.
    Cube {
        algebra: PathBuf,
        /// Comma-separated bit-strings; defaults to the whole algebra.
        #[arg(long)]
        points: Option<String>,
    },
    /// Search for balanced measures from random starts.
    Balance {
        algebra: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check that a measure is balanced and classify it.
    Classify { measure: PathBuf },
    /// Tabulate the cube counts and fixed points of the cube dynamics.
    Formulas {
        #[arg(long, default_value_t = 7)]
        n_max: u32,
        /// Emit CSV rows instead of a JSON report.
        #[arg(long)]
        csv: bool,
    },
    /// Find a cube invariant under a group of automorphisms.
    Act {
        algebra: PathBuf,
        group: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Generate an algebra file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Write the algebra here and print a report instead of the algebra.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Clone, Debug)]
enum GenKind {
    Hypercube { n: usize },
    Tree {
        /// Edges as "u-v" pairs, comma-separated, e.g. "0-1,1-2".
        #[arg(long)]
        edges: String,
    },
    Grid { a: usize, b: usize },
    Random {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("medlab: cannot start {j} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command, cli.pretty) {
        Ok(output) => {
            print!("{}", output.text);
            ExitCode::from(output.code)
        }
        Err(failure) => {
            eprintln!("medlab: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
