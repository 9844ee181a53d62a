//! Random source identification from boundary flux and terminal data:
//! admissible source pairs, the stability-ratio experiment, and a ridge
//! reconstruction of separable sources.

mod reconstruct;
mod source;
mod stability;

pub use reconstruct::reconstruct_time_profile;
pub use source::{check_gradient_domination, make_separable_source, GradientDomination, SeparableSource};
pub use stability::{
    coupled_gaps, gap_norms, stability_experiment, uniformity_sweep, GapSample, SourceFamily, StabilityRecord,
    StabilityStatus, UniformityRow, UniformityTable, Verdict,
};
