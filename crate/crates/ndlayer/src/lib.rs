//! File formats, reports and the `ndlayer` command-line tool built on
//! [`ndlayer_core`].
//!
//! - [`dataset_io`]: dataset CSV and synthetic-spec JSON
//! - [`checkpoint`]: bit-exact JSON model checkpoints
//! - [`report`]: text tables and plotting CSVs
//! - [`run`]: provenance headers, per-run output directories, worker pool
//! - [`cli`]: argument parsing and subcommands

pub mod checkpoint;
pub mod cli;
pub mod dataset_io;
mod error;
pub mod report;
pub mod run;

pub use error::{CliError, Result};
pub use ndlayer_core as core;
