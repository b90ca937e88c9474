//! Spectral singularities of composite one-dimensional non-Hermitian
//! scatterers: detection, inverse design, analytic eigenfunctions, and a
//! lattice simulation of the resulting lasing cavity.

pub mod cavity;
pub mod error;
pub mod scatter;
pub mod solver;
pub mod wavefield;

pub use error::{Error, Result};
pub use num_complex::Complex64;
