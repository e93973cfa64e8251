//! Config-driven experiment runner behind the command-line tool.

pub mod config;
pub mod report;
pub mod run;

pub use config::{Category, CheckKind, CheckSpec, ExperimentConfig, Tolerance};
pub use report::{emit, emit_samples, parse, Format};
pub use run::{run, run_with_samples, simulate, CheckResult, Environment, ExperimentReport, SampleDump};
