//! File formats, configuration and commands around `bikegrow-core`.

pub mod config;
pub mod formats;
pub mod output;
pub mod pipeline;
