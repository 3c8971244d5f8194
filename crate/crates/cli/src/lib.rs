//! Scenario files, reproduction of the built-in examples and structured reports.

pub mod report;
pub mod scenario;

pub use report::{exit, reproduce, run_scenario, Report};
pub use scenario::Scenario;
