//! `qlike`: file-driven front end for the qlike library.
//!
//! Exit codes: 0 success, feasible or clean; 1 usage or input error;
//! 2 certified negative (infeasible, no coloring, violations found);
//! 3 indeterminate.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qlike::representation::{ClassicalProblem, RepresentationProblem};
use qlike::{AnyOrder, Subspace};

use commands::{load, CliError, PironInput};
use report::{InputFile, Outcome, RunConfig};

#[derive(Parser)]
#[command(name = "qlike", version, about = "Likelihood orders over subspaces: audits, representation, sphere paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, default_value_t = 1000)]
    samples: u64,

    /// Overrides the subcommand's default tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Axiom audit of an order file.
    Audit { order: PathBuf },
    /// Representing density operator or infeasibility certificate.
    Represent {
        problem: PathBuf,
        /// Only require A ⪯ B ⇒ μ(A) ≤ μ(B).
        #[arg(long)]
        partial: bool,
    },
    /// Additive probability on a finite set.
    Classical { problem: PathBuf },
    /// EW-hop path between two points of the northern hemisphere.
    Piron { input: PathBuf },
    /// Two-color search on a ray set (Peres-33 when no file is given).
    Ks { rays: Option<PathBuf> },
    /// Named orders and their characteristic checks.
    Gallery,
    /// Hausdorff distance between two subspace files.
    Distance { a: PathBuf, b: PathBuf },
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Audit { .. } => "audit",
        Command::Represent { .. } => "represent",
        Command::Classical { .. } => "classical",
        Command::Piron { .. } => "piron",
        Command::Ks { .. } => "ks",
        Command::Gallery => "gallery",
        Command::Distance { .. } => "distance",
    }
}

fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError(format!("--tol must be positive, got {tol}")))
    }
}

fn execute(cli: &Cli) -> Result<(Vec<InputFile>, Outcome), CliError> {
    let tol = cli.tol.map(check_tol).transpose()?;
    Ok(match &cli.command {
        Command::Audit { order } => {
            let o = load::<AnyOrder>(order)?;
            (vec![o.input], commands::run_audit(&o.value, cli.seed, cli.samples)?)
        }
        Command::Represent { problem, partial } => {
            let p = load::<RepresentationProblem>(problem)?;
            (vec![p.input], commands::run_represent(&p.value, tol.unwrap_or(1e-6), *partial)?)
        }
        Command::Classical { problem } => {
            let p = load::<ClassicalProblem>(problem)?;
            (vec![p.input], commands::run_classical(&p.value, tol.unwrap_or(1e-6))?)
        }
        Command::Piron { input } => {
            let p = load::<PironInput>(input)?;
            (vec![p.input], commands::run_piron(&p.value, tol.unwrap_or(1e-9))?)
        }
        Command::Ks { rays } => match rays {
            Some(path) => {
                let r = load::<Vec<[f64; 3]>>(path)?;
                (vec![r.input], commands::run_ks(Some(&r.value), tol.unwrap_or(1e-9))?)
            }
            None => (vec![], commands::run_ks(None, tol.unwrap_or(1e-9))?),
        },
        Command::Gallery => (vec![], commands::run_gallery(cli.seed, cli.samples)?),
        Command::Distance { a, b } => {
            let (a, b) = (load::<Subspace>(a)?, load::<Subspace>(b)?);
            let out = commands::run_distance(&a.value, &b.value)?;
            (vec![a.input, b.input], out)
        }
    })
}

fn main() -> ExitCode {
    // clap's own exit code for usage errors is 2, which is taken
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (inputs, outcome) = match execute(&cli) {
        Ok(x) => x,
        Err(CliError(msg)) => {
            eprintln!("qlike: {msg}");
            return ExitCode::from(1);
        }
    };
    let config = RunConfig {
        subcommand: name(&cli.command),
        inputs,
        seed: cli.seed,
        samples: cli.samples,
        tol: cli.tol,
        partial: matches!(cli.command, Command::Represent { partial: true, .. }),
        format: match cli.format {
            Format::Json => "json",
            Format::Csv => "csv",
        },
    };
    let bytes = report::render(&config, &outcome);
    let written = match &cli.out {
        Some(path) => report::write_atomic(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("qlike: {msg}");
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.status.exit_code())
}
