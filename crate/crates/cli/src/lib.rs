//! File formats, reports and subcommands of the `hetroute` command line.
//!
//! Game files use the line-based `hetroute-game/1` format described in
//! [`format`]. Flow files are CSV (see [`csvio`]). Every subcommand produces a
//! report that prints either as aligned text or as JSON.

pub mod commands;
pub mod csvio;
pub mod error;
pub mod format;
pub mod repro;
pub mod report;

pub use commands::{run, Cli};
pub use error::{CliError, LoadError, ParseError, ValidationError};
pub use format::{GameFile, LoadedGame};
