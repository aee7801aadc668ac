//! Command-line front end: flat key-value run configs, CSV/JSON emission and
//! the figure presets.

pub mod config;
pub mod error;
pub mod figures;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
