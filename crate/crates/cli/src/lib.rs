//! Command-line front end for the selfish coded caching library.

pub mod commands;
pub mod config;
pub mod decimal;
pub mod schemefile;
pub mod sweep;
pub mod table;
