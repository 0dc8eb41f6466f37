//! Implementation of the `hahn` binary: argument grammar, run
//! configuration, subcommand dispatch, and report rendering. Split out as a
//! library so the decoder entry points (config files) stay fuzzable.

pub mod cli;
pub mod commands;
pub mod config;
pub mod report;
