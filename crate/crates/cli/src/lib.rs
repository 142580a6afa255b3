//! Library surface of the corrsense CLI: config parsing, units, runners
//! and output writing, kept separate from the binary for testability.

pub mod config;
pub mod output;
pub mod runner;
pub mod units;
