//! Configuration, logs, field output and the run orchestration behind the
//! command-line tool.

pub mod config;
pub mod csv;
pub mod run;
pub mod vtk;

pub use config::{ConfigError, Overrides, RunConfig};
pub use run::{run, ExitStatus, RunError, RunSummary};
