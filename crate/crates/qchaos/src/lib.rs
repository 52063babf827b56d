//! IO, configuration, parallel drivers and command implementations for the
//! `qchaos` command-line tool. The physics lives in [`qchaos_core`].

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::CliError;
