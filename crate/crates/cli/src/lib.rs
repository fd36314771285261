//! Experiment runner for the `gencheb` library: subcommand arguments, the
//! command implementations and their CSV / text outputs.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
