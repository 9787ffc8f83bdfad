//! Numerical machinery for certified Kobayashi-length bounds of loops on
//! punctured planar circle domains, with the downstream lattice-point
//! counting pipeline.

pub mod config;
pub mod density;
pub mod error;
pub mod geom;
pub mod growth;
pub mod lattice;
pub mod report;
pub mod select;
pub mod stats;
pub mod strip_analysis;
pub mod verify;

pub use error::{Error, Result};
