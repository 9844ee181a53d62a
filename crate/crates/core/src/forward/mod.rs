//! Time-stepping for the semi-discrete stochastic heat equation and
//! Monte-Carlo ensembles over Brownian paths.

mod brownian;
mod ensemble;
mod lifting;
mod problem;
mod solver;

pub use brownian::{mix64, path_seed, sample_brownian, sample_on, uniform_at, SamplePath};
pub use ensemble::{ensemble_map, ensemble_map_range, ensemble_run, expectation, Ensemble, Estimate};
pub use lifting::{boundary_flux, solve_deterministic_lifting, Lifting, LiftingBounds};
pub use problem::SpdeProblem;
pub use solver::{solve_forward, ForwardSolver, TridiagonalFactor};
