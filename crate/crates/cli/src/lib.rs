//! Library half of the `wavetrig` command: configuration, run directories
//! and the four subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{cmd_design, cmd_simulate, cmd_sweep, cmd_verify, execute, RunOutcome, SweepRow};
pub use config::{FieldSpec, ModeSpec, Overrides, RunConfig};
pub use error::{exit, CliError, CliResult};
