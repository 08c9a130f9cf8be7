//! Library side of the `projclust` command-line tool: JSON artifacts with
//! provenance, the subcommand implementations and the experiment runner.

pub mod artifact;
pub mod commands;
pub mod experiment;
pub mod pipeline;
