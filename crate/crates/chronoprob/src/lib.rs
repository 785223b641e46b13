//! File formats, built-in fixtures and the command-line front end.

pub use chronoprob_core as core;

pub mod model_file;
pub mod fixtures;
pub mod corpus;
pub mod cli;
