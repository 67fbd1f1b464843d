//! Command-line front end and HTTP service for the heat-flow visualizer.

pub mod cli;
pub mod pipeline;
pub mod server;
pub mod session;
