//! Numerical laboratory for discrete Carleman estimates of the 1-D
//! semi-discrete stochastic heat equation.
//!
//! The crate provides the finite-difference calculus on a uniform mesh, the
//! exponential Carleman weights, a Monte-Carlo forward solver, evaluators for
//! every weighted integral appearing in the estimates, and two inverse-problem
//! labs (random source identification and lateral Cauchy continuation).

pub mod carleman;
pub mod cauchy;
pub mod error;
pub mod forward;
pub mod grid;
pub mod harness;
pub mod inverse;

pub use error::{LabError, Result};
pub mod time;
pub mod weights;
