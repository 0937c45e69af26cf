//! Command-line pipeline and file formats around `mlstm-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod io;

pub use config::Config;
pub use error::CliError;
pub use exec::RayonExecutor;
