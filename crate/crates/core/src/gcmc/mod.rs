//! Grand-canonical birth/death Monte Carlo for Gibbs point processes in a
//! periodic box, with correlation estimators and a statistical GNZ test.

mod chain;
mod estimate;
mod state;

pub use chain::{birth_acceptance, death_acceptance, gcmc_step, run_chain, run_chains, ChainConfig, ChainOutput};
pub use estimate::{
    estimate_correlations, functional_estimate, gnz_statistical_test, pair_histogram, Bins, CorrelationEstimate, GBin, GnzEntry, GnzReport,
    GnzTestFunction, Psi, GNZ_PASS_FRACTION, MIN_SAMPLES,
};
pub use state::{ParticleState, PeriodicBox};
