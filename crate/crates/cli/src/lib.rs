//! Command line front end and REST service for the `geoseg` library.

pub mod commands;
pub mod params;
pub mod server;
