//! Experiment harness for `brownne-core`: config files, dataset IO, reports
//! and the command-line runners.

pub mod datasets;
pub mod idx;
pub mod checkpoint;
pub mod config;
pub mod experiments;
pub mod report;
