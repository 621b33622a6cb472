//! Numerical laboratory for directional maximal operators and directional
//! Hilbert transforms on the periodic plane.

pub mod bmo;
pub mod cli;
pub mod directions;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod phase;
pub mod stats;

pub use error::{Error, Result};
