//! Lyapunov exponents of F_p along an orbit.
//!
//! Two estimators share one orbit: the chain rule (1/n) Σ ln σ(z_k) with σ
//! the spherical derivative, and a shadow trajectory kept at chordal
//! distance [`SHADOW_OFFSET`] and renormalized every step.
//!
//! Forward iteration cannot stay on a repelling set in floating point (on
//! |z| = 1 with p = 0 the modulus error doubles each step), so
//! [`julia_lyapunov_estimate`] builds its orbit backwards from random
//! preimages, which contract onto the Julia set, and then reads it forwards.

use qfc_qstate::{QfcError, Result, C64};
use qfc_stochastic::RngStream;

use crate::riemann::{Homogeneous, RiemannPoint};

pub const SHADOW_OFFSET: f64 = 1e-9;
/// ln σ is clamped below at ln of this.
pub const SIGMA_FLOOR: f64 = 1e-300;
/// Backward steps discarded next to the seed point.
pub const BACKWARD_BURN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    pub chain_rule: f64,
    pub shadow: f64,
    pub n_iters: usize,
    /// σ fell below SIGMA_FLOOR somewhere (orbit at a critical point or
    /// supersink); the estimate is then only a bound.
    pub saturated: bool,
}

fn estimate_on(orbit: &[Homogeneous], p: C64) -> LyapunovEstimate {
    let n = orbit.len() - 1;
    let mut chain = 0.0;
    let mut shadow = 0.0;
    let mut saturated = false;
    let mut toward = orbit[0];
    for k in 0..n {
        let z = orbit[k];
        let s = z.spherical_derivative(p);
        if s < SIGMA_FLOOR {
            saturated = true;
        }
        chain += s.max(SIGMA_FLOOR).ln();

        let w = z.offset(toward, SHADOW_OFFSET);
        let (fz, fw) = (z.map(p), w.map(p));
        let d0 = z.chordal(w);
        let d1 = fz.chordal(fw);
        shadow += (d1.max(SIGMA_FLOOR * d0) / d0).ln();
        // carry the separation direction along the reference orbit
        toward = fw;
    }
    LyapunovEstimate {
        chain_rule: chain / n as f64,
        shadow: shadow / n as f64,
        n_iters: n,
        saturated,
    }
}

/// Forward orbit from z₀.
pub fn lyapunov_estimate(z0: RiemannPoint, p: C64, n_iters: usize) -> Result<LyapunovEstimate> {
    if n_iters == 0 {
        return Err(QfcError::OutOfRange { field: "n_iters", value: 0.0 });
    }
    let mut orbit = Vec::with_capacity(n_iters + 1);
    let mut h = z0.to_homogeneous();
    orbit.push(h);
    for _ in 0..n_iters {
        h = h.map(p);
        orbit.push(h);
    }
    Ok(estimate_on(&orbit, p))
}

/// The reversed random backward orbit of z₀, starting `n_iters` steps from
/// its far end; the last [`BACKWARD_BURN`] preimages nearest z₀ are dropped.
pub fn backward_orbit(z0: RiemannPoint, p: C64, n_iters: usize, seed: u64) -> Vec<Homogeneous> {
    let mut rng = RngStream::new(seed, 0);
    let mut h = z0.to_homogeneous();
    let mut pre = Vec::with_capacity(n_iters + BACKWARD_BURN + 1);
    for _ in 0..n_iters + BACKWARD_BURN + 1 {
        h = h.preimages(p)[usize::from(rng.uniform() < 0.5)];
        pre.push(h);
    }
    pre.reverse();
    pre.truncate(n_iters + 1);
    pre
}

/// Chain-rule and shadow estimates along an orbit that lies on the Julia set.
pub fn julia_lyapunov_estimate(z0: RiemannPoint, p: C64, n_iters: usize, seed: u64) -> Result<LyapunovEstimate> {
    if n_iters == 0 {
        return Err(QfcError::OutOfRange { field: "n_iters", value: 0.0 });
    }
    let orbit = backward_orbit(z0, p, n_iters, seed);
    let est = estimate_on(&orbit, p);
    if est.saturated {
        return Err(QfcError::Undefined("backward orbit passed through a critical point".into()));
    }
    Ok(est)
}
