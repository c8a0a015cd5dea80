//! Experiment driver for the `pdc-modes` library: configuration parsing,
//! figure sweeps and CSV output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod selftest;
