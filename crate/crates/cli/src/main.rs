use std::path::PathBuf;
use std::process::ExitCode;

use bogo_harness::{run, RunOptions, Subcommand};
use clap::Parser;

/// Run a bogo experiment and write its results plus a manifest.
#[derive(Debug, Parser)]
#[command(name = "bogo", version, about)]
struct Cli {
    /// Which experiment to run.
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// JSON experiment configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, env = "BOGO_JOBS")]
    jobs: Option<usize>,
    /// Output directory (default `bogo-out/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies every numerical tolerance.
    #[arg(long)]
    tolerance_scale: Option<f64>,
    /// Acceptance suite for `verify`: `all`, a criterion name or a number.
    #[arg(long)]
    suite: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        subcommand: cli.subcommand,
        config: cli.config,
        seed: cli.seed,
        jobs: cli.jobs,
        out: cli.out,
        tolerance_scale: cli.tolerance_scale,
        suite: cli.suite,
    };
    let outcome = run(&opts);
    for line in &outcome.report {
        println!("{line}");
    }
    if let Some(m) = &outcome.manifest {
        for a in m.assertions.iter().filter(|a| !a.passed) {
            eprintln!("assertion failed: {}: {}", a.name, a.detail);
        }
    }
    if let Some(e) = &outcome.error {
        eprintln!("bogo: {e}");
    }
    if let Some(dir) = &outcome.out_dir {
        println!("results in {}", dir.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}
