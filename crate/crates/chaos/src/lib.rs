//! Measurement-selected nonlinear dynamics.
//!
//! Post-selecting two copies after an XOR squares every matrix element of
//! ρ. Interleaved with a fixed unitary this gives a nonlinear map on states,
//! which on pure qubits is the rational map F_p(z) = (z² + p)/(1 − p* z²).

pub mod lyapunov;
pub mod raster;
pub mod riemann;
pub mod squaring;

pub use lyapunov::{backward_orbit, julia_lyapunov_estimate, lyapunov_estimate, LyapunovEstimate};
pub use raster::{
    box_counting_dimension, boundary_mask, classify, dyadic_sizes, julia_raster, write_raster_csv,
    RasterGrid, RasterJob, DEFAULT_CYCLE_TOL, NON_CONVERGENT,
};
pub use riemann::{
    chordal_distance, fp_derivative_abs, fp_map, spherical_derivative, Homogeneous, MapParams,
    RiemannPoint,
};
pub use squaring::{
    bell_purify_iterate, f_step, perturbed_bell_fixture, realization_gap, square_elements, su2,
    xor_gate, xor_postselect, BellIteration,
};
