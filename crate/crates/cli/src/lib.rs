//! Experiment driver for graph total variation classification: regime sweeps,
//! CSV reports, and SVG plots.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod sweep;

pub use config::{LambdaRule, SweepConfig};
pub use error::{CliError, Result};
pub use report::{RegimeReport, RegimeRow};
pub use sweep::{run_sweep, SweepOutcome};
