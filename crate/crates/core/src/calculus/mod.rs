//! Exact calculus on a finite configuration space.
//!
//! A [`SiteSpace`] of `N` sites replaces the base space; configurations are
//! subsets, the Lebesgue–Poisson measure gives each subset the weight
//! `prod sigma_x`, and every functional of interest is multilinear in the
//! per-site variables. Subset tables of length `2^N` therefore carry all the
//! information, and zeta/Möbius transforms over the subset lattice realise
//! the K-transform, its inverse, the correlation measure and the shift of
//! Taylor coefficients.

mod functional;
mod identities;
pub mod lattice;
mod set_function;
mod space;
mod transform;

pub use functional::{
    bogoliubov_eval, coefficients, derivative_bound_check, derivative_duality, occupation_probabilities, reconstruct_measure,
    variational_derivatives, variational_derivatives_by_extraction, DerivativeBoundReport, IdentityResidual, OccupationResult,
};
pub use identities::{minimal_ruelle_constant, ruelle_bound_check, star_identity_check, RuelleReport};
pub use set_function::{Role, SetFunction, SetFunctionJson};
pub use space::{Configuration, Field, SiteSpace, DEFAULT_ENUMERATION_CAP, MAX_SITES};
pub use transform::{
    coherent_state, coherent_table, correlation_from_measure, correlation_masses, k_inverse, k_transform, k_transform_table,
    lebesgue_poisson_integral, measure_from_correlation, project_measure, validate_measure,
};
