//! `magbloch` binary: dispatches the subcommands defined in `magbloch::cli`.
//!
//! Exit status is 0 on success, 1 on any error or failed built-in check.
//! Errors are emitted to stderr as a single machine-readable JSON record
//! `{"error": {"kind": ..., "message": ...}}`; human-oriented summary lines
//! and the list of written files go to stdout (suppressed by `--quiet`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use magbloch::cli::{run, CommandKind};
use magbloch::config::parse_config;
use magbloch::error::Error;

#[derive(Parser)]
#[command(
    name = "magbloch",
    version,
    about = "Magnetic Bloch bands of the Landau Hamiltonian with rational flux",
    arg_required_else_help = true
)]
struct Cli {
    /// Path to the JSON run configuration (required).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory artifacts are written into (created if missing).
    #[arg(long, global = true, value_name = "PATH", default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for the θ-grid sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Suppress stdout summary lines (artifacts are still written).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Verify the magnetic translation algebra at machine precision.
    AlgebraCheck,
    /// Compute band functions E_n(θ) over the θ-grid.
    Bands,
    /// Measure band flatness against a calibrated numerical baseline.
    Flatness,
    /// Track degenerate levels through V + t·U and cross-check their slopes.
    Perturb,
    /// Sweep band energies over a list of flux fractions p/q.
    Butterfly,
    /// Scan the zero set of one band's eigenfunction on the torus.
    Nodal,
}

impl Command {
    fn kind(self) -> CommandKind {
        match self {
            Command::AlgebraCheck => CommandKind::AlgebraCheck,
            Command::Bands => CommandKind::Bands,
            Command::Flatness => CommandKind::Flatness,
            Command::Perturb => CommandKind::Perturb,
            Command::Butterfly => CommandKind::Butterfly,
            Command::Nodal => CommandKind::Nodal,
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    let record = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{record}");
}

fn try_main(cli: &Cli) -> Result<bool, Error> {
    if let Some(n) = cli.threads {
        // Ignore failure: the global pool can only be set once (e.g. tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Validation(vec!["--config <PATH> is required".to_string()]))?;
    let config = parse_config(config_path)?;
    let outcome = run(cli.command.kind(), &config, &cli.out_dir)?;
    if !cli.quiet {
        println!("{}", outcome.summary);
        for file in &outcome.files {
            println!("wrote {}", file.display());
        }
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match try_main(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            emit_error(
                "check_failed",
                "a built-in check failed; see the written report",
            );
            ExitCode::FAILURE
        }
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
