//! Configuration, run orchestration and file output.

mod commands;
mod config;
pub mod output;
pub mod recipes;

pub use commands::{
    cmd_besov_profile, cmd_predict_blowup, cmd_run, cmd_sweep, sweep_points, BesovProfile,
    Prediction, RunManifest, SnapshotField, SweepAxis, SweepRow, VERSION,
};
pub use config::{parse_config, parse_initial_data, parse_number, RunConfig, KNOWN_KEYS};
