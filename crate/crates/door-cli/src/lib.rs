//! CSV ingestion, configuration, report emission, and the command layer
//! behind the `doorcrt` binary.

pub mod commands;
pub mod config;
pub mod io;
pub mod report;
