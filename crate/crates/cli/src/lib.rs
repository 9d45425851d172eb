//! Configuration, orchestration and report writing for the `fham` binary.

pub mod config;
pub mod output;
pub mod report;
pub mod run;
