//! Report formatting and subcommand implementations for the `relstate`
//! command-line tool.

pub mod commands;
pub mod json;
pub mod report;

pub use report::{Format, Report, ReportRow, Status};
