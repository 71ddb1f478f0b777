//! Experiment runner for `mflin-core`: JSON configs in, CSV/JSON artifacts
//! and a hashed manifest out.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiments;
pub mod run;

pub use error::CliError;
pub use run::{execute, load, run, RunOptions};
