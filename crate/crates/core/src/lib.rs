//! Nonholonomic mechanics with general (possibly non-Chetaev) constraint forces.
//!
//! A problem is a regular Lagrangian `L(q, v)` on `TQ`, velocity constraints
//! `psi^a(q, v) = 0`, optional extra annihilator directions and a bundle of
//! horizontal reaction forces. The crate evaluates the symplectic data of `L`,
//! eliminates the multipliers, checks the compatibility conditions pointwise
//! and integrates the resulting second-order field.

pub mod cli;
pub mod constraints;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod mechanics;
pub mod scenarios;
pub mod simulate;
pub mod solver;

pub use constraints::{NonholonomicProblem, ProblemBuilder};
pub use error::{Error, Result};
pub use mechanics::{LagrangianModel, State};
