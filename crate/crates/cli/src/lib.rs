//! Experiment harness for `bogo-core`.
//!
//! Every subcommand follows the same path: resolve the configuration, run the
//! engine inside a thread pool of the requested size, write the result files
//! atomically and finish with a manifest. The `verify` subcommand runs the
//! acceptance suites defined in [`suites`].

pub mod config;
pub mod manifest;
pub mod output;
pub mod plot;
pub mod run;
pub mod suites;

pub use config::{ExperimentConfig, Subcommand, DEFAULT_SEED};
pub use manifest::{Assertion, RunManifest};
pub use output::DataFile;
pub use plot::{emit_plotdata, RunResults, PLOT_KINDS};
pub use run::{run, RunOptions, RunOutcome};

/// Harness failures, each with a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Unreadable or invalid configuration.
    #[error("config error: {0}")]
    Config(String),
    /// The requested problem lies outside the regime where the solver is certified.
    #[error("{0}")]
    Regime(String),
    /// Bad request for plot data.
    #[error("plot data: {0}")]
    Plot(String),
    /// Engine or I/O failure while running.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    /// 2 for configuration problems, 1 for regime refusals (a negative answer,
    /// not a crash), 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Plot(_) => 2,
            HarnessError::Regime(_) => 1,
            HarnessError::Runtime(_) => 3,
        }
    }
}

impl From<bogo_core::Error> for HarnessError {
    fn from(e: bogo_core::Error) -> Self {
        use bogo_core::Error as E;
        match e {
            E::OutsideUniquenessRegime { .. } => HarnessError::Regime(e.to_string()),
            E::Domain(_) | E::Validation(_) | E::EnumerationCap { .. } | E::InsufficientSamples { .. } | E::Json(_) => {
                HarnessError::Config(e.to_string())
            }
            E::NonConvergence { .. } | E::Instability { .. } => HarnessError::Runtime(e.to_string()),
        }
    }
}
