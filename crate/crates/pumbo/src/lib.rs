//! File formats, benchmark driver and command line for `pumbo-core`.

pub mod bench;
pub mod cli;
pub mod csvio;
pub mod error;
pub mod fit;

pub use error::{CliError, Result};
