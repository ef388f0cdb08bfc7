//! Double superconducting cavity with a semi-transparent central wall.
//!
//! Lengths are measured in units of the total cavity length `L` and
//! `hbar = c = 1`, so a mode's frequency equals its wavenumber. Modes are
//! indexed from zero in ascending frequency.

pub mod chebyshev;
pub mod circuit;
pub mod couplings;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod geometry;
pub mod modes;
pub mod msa;
pub mod rk4;
pub mod spectrum;

pub use error::{Error, Result};
pub use geometry::CavityGeometry;

pub use num_complex::Complex64 as C64;
