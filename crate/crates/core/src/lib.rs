//! Horizontal Delaunay H-surfaces in M²(κ)×ℝ built by conjugating minimal disks in Berger spheres.

pub mod ambient;
pub mod cylinders;
pub mod error;
pub mod geometry;
pub mod io;
pub mod moduli;
pub mod plateau;
pub mod polygon;
pub mod quadrature;
pub mod sister;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
