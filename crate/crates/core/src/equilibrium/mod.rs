//! Pair potentials, exact Gibbs measures on finite spaces, and the
//! equilibrium identities they satisfy.

mod bogoliubov;
mod discrete;
mod potential;

pub use bogoliubov::{bogoliubov_equation_residual, shifted_field, BogoliubovForm};
pub use discrete::{beta_for_mayer_norm, continuum_mayer_norm, unit_sphere_area, DiscretePotential, EnergyReport};
pub use potential::{Energy, InfSymbol, MatrixEntry, PairPotential, PotentialKind, PotentialSpec, RadialForm, RadialPotential};
