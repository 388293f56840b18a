//! Driver code behind the `thermocoding` binary: configuration, sweeps, the
//! worked-example report and the verification suite.

pub mod checks;
pub mod config;
pub mod example3;
pub mod sweep;

pub use config::ExperimentConfig;
pub use sweep::{SweepKind, Table};
