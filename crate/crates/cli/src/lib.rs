//! Library side of the `randbeam` command: experiment files, result
//! tables and the figure catalog.

pub mod commands;
pub mod config;
pub mod context;
pub mod figures;
pub mod output;

pub use commands::{Common, Outcome};
pub use config::{ConfigError, ExperimentFile, Overrides};
pub use figures::{figure_catalog, FigureId, FigureSpec};

/// Exit status for a finished command.
pub fn exit_code(result: &anyhow::Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::ValidationFailed) => 1,
        Err(_) => 2,
    }
}
