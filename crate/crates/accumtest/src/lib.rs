//! CSV formats, run manifests, parallel drivers and the command-line
//! front end for the accumulation-test core.

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod numfmt;
pub mod parallel;
pub mod validate;

pub use error::{CliError, CliResult};
