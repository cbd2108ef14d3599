//! Problem files, profiles, reports and subcommands for the `interim`
//! command-line tool.

pub mod commands;
pub mod number;
pub mod problem_file;
pub mod profile_spec;
pub mod report;
