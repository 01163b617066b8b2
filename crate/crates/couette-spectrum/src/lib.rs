//! Runner for continuous-spectrum Taylor-Couette simulations: run
//! configuration, preset scenarios, the on-disk kernel cache, snapshots and
//! output files.

pub mod cache;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;
pub mod presets;
pub mod run;
pub mod snapshot;

pub use config::RunConfig;
pub use error::AppError;
pub use run::{run_scenario, RunFailure, RunOptions, RunSummary};
