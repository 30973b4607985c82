//! Experiment harness, CSV artifacts and the `voi` command line for
//! [`voi_core`].

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod harness;
