//! Command-line front end: model spec files in, verdict reports out.
//!
//! Subcommands `dtmc`, `ctmc`, `diffusion` analyze one model and emit a
//! JSON `RunReport`; `verify` runs the full identity suite for the
//! input's kind. Exit code 0 means every verdict passed, 2 means some
//! verdict failed, 1 means the input or usage was bad.

pub mod commands;
pub mod report;
pub mod spec_files;

pub use commands::run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {path}")]
    FileNotFound { path: String },

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson { line: usize, column: usize, message: String },

    #[error("schema error: {message}")]
    SchemaError { message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] kemeny_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;
