//! Command-line front end for the `heun` crate: coefficient expansions,
//! terminating accessory-parameter search, closed-form solution assembly
//! with verification, and seeded catalog sweeps.

pub mod commands;
pub mod jsonfmt;
pub mod sampling;

pub use commands::{execute, Cli, Outcome};
