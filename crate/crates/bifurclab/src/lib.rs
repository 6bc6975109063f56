//! File formats, configuration, parallel execution and the command line for
//! `bifurclab-core`.
//!
//! * [`config`]: the JSON run configuration (family block, walk block and the
//!   schema version);
//! * [`csv`]: field, divisor-cloud, point-cloud and growth tables;
//! * [`image`]: P6 PPM heatmaps with optional PNG output;
//! * [`manifest`]: run manifests with output digests;
//! * [`exec`]: a rayon-backed [`bifurclab_core::Executor`];
//! * [`cli`]: the `bifurclab` subcommands.

pub mod cli;
pub mod config;
pub mod csv;
pub mod error;
pub mod exec;
pub mod image;
pub mod manifest;

pub use error::CliError;
