//! Configuration-driven experiment runner behind the command-line tool.

mod config;
mod output;
mod run;

pub use config::{
    parse_config, CauchyConfig, Command, EnsembleConfig, ExperimentConfig, GridConfig, OutputConfig, ProblemConfig, TimeConfig,
    WeightConfig,
};
pub use output::{csv_body, read_csv, render_csv, write_atomic, Cell, ResultTable};
pub use run::{compute, config_hash, run, RunOptions, RunOutcome, VERSION};
