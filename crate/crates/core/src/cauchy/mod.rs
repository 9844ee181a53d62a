//! Lateral Cauchy problem: data extraction at `x_{N+1}`, restricted norms,
//! the Hölder-exponent experiment and a regularized continuation solver.

mod continuation;
mod data;
mod holder;

pub use continuation::{continue_ensemble, continue_solution, Continuation, ContinuationProblem, ContinuationSettings, FluxOperator};
pub use data::{generate_cauchy_data, global_norm, interior_norm, lateral_trace, region_norm_sq, CauchyData, ObservationRegion};
pub use holder::{
    fit_power_law, geometric_frequencies, holder_experiment, CauchyFamily, HarmonicFamily, HolderExperiment, HolderRecord, LevelContext,
    PowerFit,
};
