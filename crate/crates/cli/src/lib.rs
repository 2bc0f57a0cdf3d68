//! Driver for seeded verification runs over the relindex identities.

pub mod commands;
pub mod config;
pub mod runner;

pub use config::{Cli, Command, ExperimentConfig};

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const IDENTITY_FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
}
