//! File formats, seeded parallel Monte Carlo, reports and the command-line
//! interface around `ustfield-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod mc;
pub mod report;
