//! Batch driver for the adaptive stochastic Galerkin experiments: configuration,
//! artifacts on disk and overkill reference solutions.

pub mod config;
pub mod error;
pub mod reference;
pub mod run;

pub use config::{output_root, ReferenceConfig, RunConfig, OUTPUT_ROOT_ENV};
pub use error::{CliError, Result};
pub use reference::{reference_goal, reference_run, ReferenceSolution};
pub use run::{run_experiment, RunOutcome, Summary};
