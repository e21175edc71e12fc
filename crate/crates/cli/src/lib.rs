//! Library surface of the experiment runner; the binary in `main.rs` is a
//! thin argument-parsing shell over these modules.

pub mod commands;
pub mod config;
pub mod hpo;
pub mod runner;

pub use commands::{cmd_replay, cmd_run, cmd_sweep_agents, cmd_sweep_byzantine};
pub use config::ExperimentConfig;
pub use hpo::cmd_hpo;
