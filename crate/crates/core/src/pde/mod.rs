//! Solvers for the four equation classes and their closed-form references.

pub mod reference;
pub mod solver;

pub use reference::{Barenblatt, ReferenceSolution};
pub use solver::{reference_eval, residual, solve, stable_dt, Boundary, Residual, SolverConfig};
