//! Library side of the `funnelim` command-line tool: scenario files,
//! check reports, CSV and SVG export and the subcommands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod report;
pub mod svg;
