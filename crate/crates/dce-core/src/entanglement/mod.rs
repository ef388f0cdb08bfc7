//! Decoupling the two halves by a sudden barrier and the entanglement left
//! between their local modes.

pub mod gaussian;
pub mod overlap;
pub mod protocols;

pub use gaussian::{log_negativity, symplectic_eigenvalues, two_mode_squeezed, GaussianState};
pub use overlap::{overlap_coefficients, LocalizedMode, OverlapCoefficients};
pub use protocols::*;
