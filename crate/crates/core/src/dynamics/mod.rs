//! Non-equilibrium diffusion dynamics: interacting Brownian particles, the
//! quasi-observable generator, the truncated correlation hierarchy, and the
//! evolution equations of Bogoliubov functionals.
//!
//! The hierarchy and the generator run on 1-D grids; the particle
//! simulation works in any supported box dimension.

mod evolution;
mod generator;
mod grid;
mod hierarchy;
mod sde;
mod tables;

pub use evolution::{
    chain_rule_check, first_variation, functional_evolution_residual, hopf_residual, truncated_functional, Bump, EvolutionResidual,
    ExpMinusOne, TestField, ZeroField, RESIDUAL_FLOOR,
};
pub use generator::{apply_h_hat, QuasiObservableGrid};
pub use grid::{Grid1d, PairTable};
pub use hierarchy::{hierarchy_rhs, hierarchy_solve, Closure, HierarchyState, Profile, RuelleDiagnostic, SolveSettings, Timeline};
pub use sde::{
    density_profile, displacement_variance, drift, empirical_correlations, simulate_sde, DensityBin, InitRule, Replica, SdeConfig,
    SdeOutput, MIN_REPLICAS,
};
