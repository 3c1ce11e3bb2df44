//! `orthoscheme`: structural checks, down-face representations, intrinsic
//! distances, and CAT(0) testing for orthoscheme complexes of semilattices.
//!
//! All results go to stdout as JSON; diagnostics go to stderr. Exit codes:
//! 0 ok, 2 parse error, 3 precondition violated, 4 budget exceeded.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use orthoscheme_cli::{
    cmd_cat0, cmd_check, cmd_distance, cmd_generate, cmd_represent, CliError, RunConfig,
};

#[derive(Parser)]
#[command(name = "orthoscheme", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Distance tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for all randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sampled comparison triples for `cat0`.
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    /// Gallery budget override for the geodesic solver.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Output format (JSON only).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Structural predicates of a poset (semilattice, locally
    /// distributive/Boolean, flag) with witnesses.
    Check { poset: String },
    /// Down-face representation of a locally distributive semilattice.
    Represent { poset: String },
    /// Intrinsic distance between two points. The space file may hold a
    /// poset (orthoscheme complex) or a complex (cubical cone); points are
    /// inline JSON or @file references.
    Distance { space: String, p: String, q: String },
    /// CAT(0) verdict for the orthoscheme complex of a semilattice.
    Cat0 { poset: String },
    /// Emit a named poset family: boolean N, chain N, empty-triangle,
    /// diamond-m3, divisor N, random-distributive SIZE, ncp N.
    Generate { family: String, arg: Option<String> },
}

fn read_input(spec: &str) -> Result<String, CliError> {
    // A leading '{' means inline JSON; anything else (optionally prefixed
    // with @) is a file path.
    let trimmed = spec.trim_start();
    if trimmed.starts_with('{') {
        return Ok(spec.to_string());
    }
    let path = spec.strip_prefix('@').unwrap_or(spec);
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {path}: {e}")))
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if !(cli.tol > 0.0) {
        return Err(CliError::Parse(format!(
            "tolerance must be positive (got {})",
            cli.tol
        )));
    }
    let cfg = RunConfig {
        tol: cli.tol,
        seed: cli.seed,
        trials: cli.trials,
        budget: cli.budget,
    };
    match &cli.command {
        Command::Check { poset } => cmd_check(&read_input(poset)?),
        Command::Represent { poset } => cmd_represent(&read_input(poset)?),
        Command::Distance { space, p, q } => {
            cmd_distance(&read_input(space)?, &read_input(p)?, &read_input(q)?, &cfg)
        }
        Command::Cat0 { poset } => cmd_cat0(&read_input(poset)?, &cfg),
        Command::Generate { family, arg } => cmd_generate(family, arg.as_deref(), &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            println!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            // Budget errors still print their best-known JSON to stdout.
            if let CliError::Budget(best) = &e {
                println!("{best}");
            }
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
