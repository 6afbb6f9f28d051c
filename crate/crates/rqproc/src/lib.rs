//! File formats, command-line interface and the parallel Monte-Carlo
//! harness around [`rqproc_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod sim;

pub use error::{CliError, Result};
