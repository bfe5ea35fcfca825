//! `liegen`: batch front end for exact Lie closures, identity checks, flows
//! and point-moving certificates.

mod cache;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use output::{CliError, Envelope};

#[derive(Parser, Debug)]
#[command(
    name = "liegen",
    version,
    about = "Exact Lie algebras of vector fields on SL2 and xy = z^2"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[command(next_help_heading = "Global options")]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the human summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Leave timing and cache status out of the JSON report.
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Directory holding cached closures.
    #[arg(long, global = true, default_value = ".liegen-cache")]
    pub cache_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the catalogued bracket identities exactly.
    VerifyIdentities(commands::VerifyIdentities),
    /// Compute (or load) a certified closure and check frame multiples against it.
    Closure(commands::Closure),
    /// Certify a field as a member of a stored closure.
    Member(commands::Member),
    /// Write a field as a polynomial combination of frame fields.
    Decompose(commands::Decompose),
    /// Apply a closed-form flow to a point.
    Flow(commands::Flow),
    /// Compare the transport of Xi by the Theta flow with Xi - tH - t^2 Theta.
    PullbackCheck(commands::PullbackCheck),
    /// Approximate the flow of [A, B] by commutators of flows.
    Trotter(commands::Trotter),
    /// Plan and verify a certificate moving sources to targets on the quadric.
    MovePoints(commands::MovePoints),
    /// Build a shear field small on all balls but the last and close to v0 there.
    LemmaApprox(commands::LemmaApprox),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyIdentities(_) => "verify-identities",
            Command::Closure(_) => "closure",
            Command::Member(_) => "member",
            Command::Decompose(_) => "decompose",
            Command::Flow(_) => "flow",
            Command::PullbackCheck(_) => "pullback-check",
            Command::Trotter(_) => "trotter",
            Command::MovePoints(_) => "move-points",
            Command::LemmaApprox(_) => "lemma-approx",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("LIEGEN_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "LIEGEN_THREADS must be a positive integer, got '{text}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn run(command: &Command, global: &Global) -> Result<output::Report, CliError> {
    configure_threads()?;
    match command {
        Command::VerifyIdentities(c) => c.run(),
        Command::Closure(c) => c.run(global),
        Command::Member(c) => c.run(),
        Command::Decompose(c) => c.run(),
        Command::Flow(c) => c.run(),
        Command::PullbackCheck(c) => c.run(),
        Command::Trotter(c) => c.run(),
        Command::MovePoints(c) => c.run(global),
        Command::LemmaApprox(c) => c.run(global),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli.command, &cli.global);
    let envelope = Envelope::new(cli.command.name(), result, &cli.global, start.elapsed());
    match envelope.emit(&cli.global) {
        Ok(()) => ExitCode::from(envelope.exit_code()),
        // a closed pipe downstream is not our failure
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::from(envelope.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
