//! System-definition files and the subcommands of the `level3` tool.

pub mod bundled;
pub mod commands;
pub mod error;
pub mod syntax;

pub use commands::{Options, Output};
pub use error::{CliError, CliResult};
pub use syntax::{parse_file, SystemFile};
