//! Command-line front end for `ofdm-mpe-core`: TOML run configurations, CSV
//! export with atomic writes, and a rayon-parallel Monte Carlo runner whose
//! output is identical to the serial one.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod runner;

pub use config::RunConfig;
pub use error::CliError;
