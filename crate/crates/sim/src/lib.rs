//! Seeded Monte-Carlo campaigns, CSV outputs and the `rissec` command line
//! on top of [`rissec_core`].
//!
//! A campaign is a JSON [`ExperimentConfig`]: a base system, an optional
//! one-parameter sweep, a trial count and the schemes to compare. Every
//! trial draws its channels from a seed derived only from the master seed
//! and the trial index, so all schemes and all sweep points of one trial see
//! the same realization.

pub mod experiment;
pub mod harness;
pub mod io;
pub mod oracle;
pub mod seed;

pub use experiment::{ExperimentConfig, Sweep};
pub use harness::{draw_trial, run_monte_carlo, TrialRecord};
pub use io::{emit_convergence_trace, emit_csv, load_experiment, load_system_config, IoError};
