//! Transfer-matrix algebra and closed-form amplitudes for point scatterers.
//!
//! Units are ħ = m = 1: the free Hamiltonian is `-½∂²ₓ` and `e^{ikx}` has
//! energy `k²/2`. On a lattice the coordinate is the site index and the
//! energy is `-2κ cos k`. In every region a wave is `A e^{ikx} + B e^{-ikx}`
//! and a transfer matrix maps `(A, B)` on the left of a scatterer to `(A, B)`
//! on its right, so a composite's matrix is the product with the rightmost
//! center outermost.

mod center;
mod composite;
mod matrix;

pub use center::{
    delta_amplitudes, delta_amplitudes_complex, lattice_amplitudes, lattice_energy, Medium,
    ScatteringCenter,
};
pub use composite::{compose, composite_m22, jost_wronskian, transfer_matrix, Composite};
pub use matrix::{ScatteringAmplitudes, TransferMatrix, WAVENUMBER_MATCH};
