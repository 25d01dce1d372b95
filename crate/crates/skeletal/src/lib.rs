//! File formats, campaigns and the command-line tool built on `skeletal-core`.

pub mod mechfile;
pub mod config;
pub mod snapshot;
pub mod campaign;
pub mod plot;
pub mod commands;
