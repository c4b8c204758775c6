//! Command-line surface for the LTL learner: trace and suite file formats,
//! run reports, and the commands behind the `ltlearn` binary.

pub mod commands;
pub mod formats;
pub mod report;

pub use commands::{CliError, CmdOutput, InstanceOptions};
pub use report::{OutputFormat, RunReport};
