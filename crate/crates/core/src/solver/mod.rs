//! Fixed-point solution of the equilibrium equation in the form
//! `L = 1 + JL`, with the contraction estimates that make it unique.

mod fixed_point;
mod jop;
mod rep;

pub use fixed_point::{
    contraction_certificate, fixed_point_solve, rate_bound, ContractionReport, SolveOptions, CERTIFICATE_PAIRS, MAX_SOLVER_SITES,
};
pub use jop::{apply_j, j_eval};
pub use rep::{ent_norm_upper_bound, FunctionalRep};
