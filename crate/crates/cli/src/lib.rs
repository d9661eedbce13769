//! Configuration, experiment commands and reports for the `qrep` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod selftest;
