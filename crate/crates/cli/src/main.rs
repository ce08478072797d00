use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use splitgeom_cli::run::EXIT_ERROR;
use splitgeom_cli::{execute, RunOptions, Verb};

/// Geometry of spacelike submanifolds in split spacetimes.
///
/// Exit codes: 0 success, 1 error, 2 a hypothesis was violated,
/// 3 a counterexample flag was raised.
#[derive(Parser)]
#[command(name = "splitgeom", version)]
struct Cli {
    #[command(subcommand)]
    verb: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise identity suites and slice identities.
    Check(Common),
    /// Mean curvature, trapped classification, Gaussian curvature.
    Classify(Common),
    /// Closed-form Laplacian of tau against the discrete operator.
    Laplacian(Common),
    /// Parabolicity certificates and theorem audits.
    Audit(Common),
    /// Randomized search for trapped parabolic graphs.
    Falsify(Common),
    /// All analyses in the scenario.
    Report(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "splitgeom-out")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Nodes per grid axis, for every grid in the scenario.
    #[arg(long)]
    grid: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (verb, c) = match cli.verb {
        Command::Check(c) => (Verb::Check, c),
        Command::Classify(c) => (Verb::Classify, c),
        Command::Laplacian(c) => (Verb::Laplacian, c),
        Command::Audit(c) => (Verb::Audit, c),
        Command::Falsify(c) => (Verb::Falsify, c),
        Command::Report(c) => (Verb::Report, c),
    };
    let opts = RunOptions {
        verb,
        seed: c.seed,
        grid: c.grid,
    };
    ExitCode::from(execute(&c.scenario, &c.out, &opts) as u8)
}
