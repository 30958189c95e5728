//! Reports, configuration, and property suites for the `eigenlimit` binary.

pub mod config;
pub mod error;
pub mod family;
pub mod report;
pub mod suites;

pub use config::{Config, Tolerances};
pub use error::{CliError, Result};
pub use family::resolve_family;
pub use report::{ConvergenceReport, Metadata};
pub use suites::{run_suites, Check, SuiteReport};
