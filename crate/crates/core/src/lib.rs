//! Post-processing toolkit for block-structured thermal results.
//!
//! The crate is organised along the data path:
//!
//! * [`csr_model`] defines the on-disk dataset layout, writes datasets and
//!   generates synthetic ones.
//! * [`csr_parser`] loads datasets: a head-only fast path, a full-read
//!   oracle and a deliberately redundant per-submodel baseline.
//! * [`thermal_graph`] turns temperatures and conductors into a
//!   submodel-level heat-flow graph and applies the view filters.
//! * [`layout`] and [`render`] place and draw that graph.
//! * [`project_cache`] persists loaded timesteps in a project directory.

pub mod csr_model;
pub mod csr_parser;
pub mod error;
pub mod layout;
pub mod project_cache;
pub mod render;
pub mod thermal_graph;
pub mod units;

pub use error::{Error, Result};
