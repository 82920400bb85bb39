//! Configuration and report types behind the `penalight` binary, exposed so
//! integration tests can parse emitted artifacts.

pub mod config;
pub mod reports;
