//! File formats, experiment harness and command-line front end for the
//! `hisearch-core` search-strategy library.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

pub use error::{CliError, Result};
