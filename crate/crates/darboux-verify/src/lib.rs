//! Scenario-driven verification harness for the derivative calculus.
//!
//! A scenario file declares a group, a chart, and named fields, sections,
//! and connections as coordinate expressions. The harness resolves them,
//! runs the requested identity suites with seeded sampling, and emits a
//! deterministic JSON report: same scenario, same seed, same bytes.

pub mod error;
pub mod expr;
pub mod report;
pub mod sample;
pub mod scenario;
pub mod suites;

pub use error::{CliError, Result};
pub use report::{CaseReport, EnvReport, Report, SuiteReport};
pub use scenario::{RunConfig, Scenario};
pub use suites::{run_suite, RunCtx, SUITE_NAMES};
