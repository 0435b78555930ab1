//! `cardmatch`: solve, certify and cross-check weighted matchings.
//!
//! JSON goes to stdout, human summaries to stderr. Exit codes: 0 success,
//! 1 perfect matching requested but none exists, 2 verification failure,
//! 3 input error.

#![allow(clippy::result_large_err)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cardmatch::rational::{parse_rational, Rational};

#[derive(Parser)]
#[command(name = "cardmatch", version, about = "Weighted matching with per-cardinality optimality certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the blossom algorithm and export every intermediate matching.
    Solve(SolveArgs),
    /// Brute-force minimum weight for every cardinality.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = cardmatch::oracle::DEFAULT_NODE_LIMIT)]
        limit: usize,
    },
    /// Check a snapshot file produced by `solve` against an instance.
    Verify {
        file: PathBuf,
        #[arg(long)]
        run: PathBuf,
    },
    /// Compare uniform and unequal dual changes on the three-forest example.
    Counterexample {
        /// One amount per tree, by ascending root id.
        #[arg(long, default_value = "1,1,3")]
        amounts: String,
        /// Use this instance instead of the built-in one.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Build the doubled graph or the auxiliary completion of a snapshot.
    Reduce(ReduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Perfect,
    Maximum,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "maximum")]
    mode: ModeArg,
    /// `uniform` or `scripted=<file>` with one line of amounts per phase.
    #[arg(long, default_value = "uniform")]
    policy: String,
    /// Initial dual value of every node.
    #[arg(long, default_value = "0", value_parser = rational_arg, allow_hyphen_values = true)]
    beta: Rational,
    /// Also write the snapshot document to this file.
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Check every snapshot's certificate; exit 2 on failure.
    #[arg(long)]
    verify: bool,
    /// Compare snapshot weights with the brute-force oracle; exit 2 on mismatch.
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("construction").required(true))]
struct ReduceArgs {
    file: PathBuf,
    #[arg(long, group = "construction")]
    doubled: bool,
    /// `<snapshots.json>:<k>`
    #[arg(long, group = "construction", value_name = "SNAPSHOTS:K")]
    auxiliary: Option<String>,
    /// Write the constructed instance to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => commands::solve(&commands::SolveOptions {
            file: args.file,
            perfect: matches!(args.mode, ModeArg::Perfect),
            policy: args.policy,
            beta: args.beta,
            snapshots: args.snapshots,
            verify: args.verify,
            oracle_check: args.oracle_check,
        }),
        Command::Oracle { file, limit } => commands::oracle(&file, limit),
        Command::Verify { file, run } => commands::verify(&file, &run),
        Command::Counterexample { amounts, instance } => commands::counterexample(&amounts, instance.as_deref()),
        Command::Reduce(args) => match args.auxiliary {
            Some(spec) => commands::reduce_auxiliary(&args.file, &spec, args.out.as_deref()),
            None => commands::reduce_doubled(&args.file, args.out.as_deref()),
        },
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::INPUT_ERROR)
        }
    }
}
