//! Scenario runner for the dilaton black hole perturbation checks.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{run, write_report, Command, Timings};
pub use config::{ScenarioConfig, VariantChoice};
pub use report::RunReport;

/// Exit status: all checks passed.
pub const EXIT_OK: i32 = 0;
/// Exit status: at least one check failed, or a computation errored.
pub const EXIT_FAIL: i32 = 1;
/// Exit status: the configuration or command line was rejected.
pub const EXIT_CONFIG: i32 = 2;
