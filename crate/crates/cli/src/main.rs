//! `ftbench`: generate instances, run solvers, and summarize benchmarks.
//!
//! Exit status is 0 on success, 1 for bad input and 2 when a computation fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bench;
mod error;
mod generate;
mod solve;
mod study;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "ftbench", version, about = "Rugged-landscape annealing benchmarks")]
struct Cli {
    /// Master seed; every random stream derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write instance files.
    Generate(generate::GenerateArgs),
    /// Run a solver over instance files and emit JSON-lines records.
    Solve(solve::SolveArgs),
    /// Summarize record files into time-to-target quantiles.
    Bench(bench::BenchArgs),
    /// Residue and effort scaling over random number-partitioning ensembles.
    NppStudy(study::StudyArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| CliError::Input(format!("worker pool: {e}")))?;
    }
    match cli.command {
        Command::Generate(args) => generate::run(args, cli.seed),
        Command::Solve(args) => solve::run(args, cli.seed),
        Command::Bench(args) => bench::run(args, cli.seed),
        Command::NppStudy(args) => study::run(args, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Creates the parent directory of `path` when missing.
fn ensure_parent(path: &std::path::Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
