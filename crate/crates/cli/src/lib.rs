//! Files, formats and the command line for the `eprcommit` simulator.

pub mod commands;
pub mod config_file;
pub mod transcript_io;

pub use commands::run_cli;
