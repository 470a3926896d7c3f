//! Config-driven runner for two-slit experiments: intensity frames,
//! trajectories, fringe reports, lattice runs and the exact-solution checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod pipeline;

pub use config::{load_config, load_config_with, parse_config, ConfigError, ExperimentConfig};
pub use output::{write_csv, write_heatmap, write_overlay};
pub use pipeline::{run_pipeline, Check, Command, RunError, Summary};
