//! Scenario files, analysis dispatch and report output for `splitgeom`.

pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::{CliError, Location};
pub use run::{execute, run, write_outcome, Outcome, RunOptions, Verb};
pub use scenario::{parse_scenario, Scenario};
