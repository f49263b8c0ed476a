//! Batch front end: JSON configs in, JSON reports and CSV plot data out.

pub mod cache;
pub mod config;
pub mod plots;
pub mod report;

pub use config::{AnalysisConfig, ConfigError};
pub use report::{run, AnalysisReport};
