//! Exact and statistical machinery for point processes on configuration spaces.
//!
//! The crate is organised around five layers:
//!
//! * [`calculus`]: finite configuration spaces, the K-transform and its Möbius
//!   inverse, correlation measures, Bogoliubov functionals and their
//!   variational derivatives, all by exact subset enumeration.
//! * [`equilibrium`]: pair potentials, energies, exact discrete Gibbs
//!   measures, the GNZ identity and the Bogoliubov equilibrium equation.
//! * [`solver`]: the `L = 1 + JL` fixed-point iteration on entire functionals.
//! * [`gcmc`]: grand-canonical birth/death Monte Carlo in a periodic box.
//! * [`dynamics`]: interacting Brownian particles, the quasi-observable
//!   generator and the truncated correlation diffusion hierarchy.

pub mod calculus;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod gcmc;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
