//! Std companion of `snls-core`: experiment configuration, presets, parallel
//! ensembles, file formats and verification suites behind the `snls` CLI.

pub mod config;
pub mod error;
pub mod io;
pub mod lab;
pub mod presets;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
pub use lab::{EnsembleSummary, Lab};
