//! Configuration, orchestration and artifact emission for the front-tracking
//! simulator.

pub mod config;
pub mod execute;
pub mod svg;

pub use config::{ConfigError, Emit, RunConfig};
pub use execute::{execute, execute_run, execute_sweep, ExecError, Outcome, SCHEMA_VERSION};
