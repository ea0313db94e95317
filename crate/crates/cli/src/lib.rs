//! Library side of the `seam` command: configuration, the run pipeline and
//! its artifact writers.

pub mod bench;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod selftest;

pub use config::{Cli, Command, Mode, RunArgs};
pub use error::{CliError, CliResult};
pub use pipeline::{run, RunOutcome, RunSummary};
