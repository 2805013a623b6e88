//! Command-line experiment runner.
//!
//! `twac <subcommand> <config.toml> [--set section.key=value]... [--threads N]`
//!
//! Exit status: 0 on success, 2 for invalid input or configuration, 3 when
//! a solver does not converge, 64 for usage errors.

mod commands;
pub mod config;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use config::ExperimentConfig;
pub use manifest::{sha256_hex, Manifest, MANIFEST_NAME};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "twac", version, about = "Triple-well Allen-Cahn experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment config (TOML).
    pub config: PathBuf,
    /// Override a config value, e.g. `--set solver.radius=32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads (falls back to TWAC_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Heteroclinic profiles of the three pairs.
    Hetero(RunArgs),
    /// Degenerate-metric distances between the wells.
    Metric(RunArgs),
    /// Junction opening angles from the costs.
    Angles(RunArgs),
    /// Relax a Dirichlet triple-junction field.
    Solve(RunArgs),
    /// Blow-downs of a field and their distance to the junction cones.
    Blowdown(RunArgs),
    /// Pohozaev, W̃, equipartition, classification and circle trace.
    Diagnose(RunArgs),
    /// Minimal partition of the unit disc.
    Partition(RunArgs),
    /// Sharp against wetted partitions over a δ sweep.
    ComparePartitions(RunArgs),
    /// Perturbation test of local minimality.
    Probe(RunArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Hetero(a) => ("hetero", a),
            Command::Metric(a) => ("metric", a),
            Command::Angles(a) => ("angles", a),
            Command::Solve(a) => ("solve", a),
            Command::Blowdown(a) => ("blowdown", a),
            Command::Diagnose(a) => ("diagnose", a),
            Command::Partition(a) => ("partition", a),
            Command::ComparePartitions(a) => ("compare-partitions", a),
            Command::Probe(a) => ("probe", a),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Convergence { .. } | Error::PathConvergence { .. } => EXIT_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("TWAC_THREADS").ok().and_then(|v| v.trim().parse().ok())).filter(|n| *n > 0)
}

/// Parses arguments (including the program name), runs the subcommand and
/// returns the exit status. Messages go to stderr, a one-line result to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (name, args) = cli.command.parts();
    let mut overrides = args.set.clone();
    if let Some(o) = &args.output {
        overrides.push(format!("output={:?}", o.to_string_lossy()));
    }
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    let result = ExperimentConfig::load(&args.config, &overrides).and_then(|cfg| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_count(args.threads) {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| commands::dispatch(name, &cfg))
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("twac {name}: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors() {
        assert_eq!(run(["twac", "frobnicate", "x.toml"]), EXIT_USAGE);
        assert_eq!(run(["twac"]), EXIT_USAGE);
        assert_eq!(run(["twac", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_config_is_invalid() {
        assert_eq!(run(["twac", "angles", "/nonexistent/cfg.toml"]), EXIT_INVALID);
    }

    #[test]
    fn exit_codes_by_error() {
        let e = Error::Convergence { what: "x", iterations: 1, residual: 1.0 };
        assert_eq!(exit_code(&e), EXIT_CONVERGENCE);
        assert_eq!(exit_code(&Error::InvalidParams("x".into())), EXIT_INVALID);
    }
}
