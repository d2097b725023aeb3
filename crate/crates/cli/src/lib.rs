//! Command-line front end for the document-level translation pipeline.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

pub use args::Cli;
pub use commands::run;
pub use config::PipelineConfig;
pub use error::CliError;
