//! Experiment runner behind the `dpp` binary: configs, verification tests,
//! CSV/JSON/SVG outputs.

mod config;
mod manifest;
mod run;
mod svg;

pub use config::{
    default_allowance, load_config, parse_dims, ExperimentConfig, Overrides, TestKind,
};
pub use manifest::RunManifest;
pub use run::{run, worker_count, EXIT_NUMERICAL, EXIT_PASS, EXIT_STAT_FAIL, EXIT_USAGE};
pub use svg::{emit_svg, render, Figure};
