//! Configuration-driven front end for `dce-core`: every run writes CSV
//! files plus one JSON manifest that is enough to replay it.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod run;
pub mod svg;
pub mod sweep;

pub use error::CliError;
