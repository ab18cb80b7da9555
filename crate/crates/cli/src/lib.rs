//! Experiment runner for `fqharm`: configuration, checks, and CSV/JSON
//! reports.

pub mod checks;
pub mod config;
pub mod report;
pub mod runner;

pub use config::{Check, ConfigInvalid, ExperimentConfig, GridPoint, SharpnessCase};
pub use report::{Report, ReportRow, Status};
pub use runner::run;
