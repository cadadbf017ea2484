//! Quantum state data model for small dense systems.
//!
//! Density matrices, pure states, Bloch and Fano coordinates, the linear
//! trace fidelity, entropy and purity, and the standard operators
//! (Pauli matrices, Hadamard, spin-j angular momentum).

pub mod coords;
pub mod error;
pub mod matrix;
pub mod ops;
pub mod state;

pub use coords::{
    bloch_from_density, density_from_bloch, fano_decompose, fano_r_squared, r_squared,
    BlochVector, FanoCoefficients,
};
pub use error::{QfcError, Result};
pub use matrix::{c64, tensor_product, ComplexMatrix, C64};
pub use ops::{angular_momentum_ops, Pauli};
pub use state::{
    fidelity_trace, partial_trace, purity, von_neumann_entropy, DensityMatrix, PureState,
    Tolerances,
};
