//! Command line and HTTP/JSON front end over `bldd-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod server;
