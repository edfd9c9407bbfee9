//! Front end for `ramsey-core`: scenario files, subcommands, CSV tables and
//! run manifests.

pub mod analysis;
pub mod checks;
pub mod cli;
pub mod commands;
pub mod output;
pub mod scenario;
