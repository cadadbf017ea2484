//! Protecting two non-orthogonal qubit states against dephasing.
//!
//! The inputs |ψ₁,₂⟩ have Bloch vectors (cos θ, 0, ±sin θ). Each scheme is
//! available in closed form and as a Monte-Carlo simulation that samples the
//! phase flip, the measurement outcome and the feedback explicitly.

use std::f64::consts::FRAC_PI_2;

use qfc_qstate::matrix::{c64, ComplexMatrix};
use qfc_qstate::ops::{sigma_y, sigma_z};
use qfc_qstate::{density_from_bloch, BlochVector, DensityMatrix, PureState, QfcError, Result, C64};
use qfc_stochastic::{run_ensemble, EnsembleStats, RngStream};
use rayon::prelude::*;

/// Golden-section tolerance on χ.
pub const CHI_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationParams {
    pub p: f64,
    pub theta: f64,
    pub chi: f64,
    pub samples: u64,
    pub seed: u64,
}

impl StabilizationParams {
    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        check_theta(self.theta)?;
        if !(0.0..=FRAC_PI_2).contains(&self.chi) {
            return Err(QfcError::OutOfRange { field: "chi", value: self.chi });
        }
        if self.samples == 0 {
            return Err(QfcError::OutOfRange { field: "samples", value: 0.0 });
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(QfcError::OutOfRange { field: "p", value: p });
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(QfcError::OutOfRange { field: "theta", value: theta });
    }
    Ok(())
}

fn pure_from_bloch(v: BlochVector) -> PureState {
    // polar angle β, azimuth φ
    let beta = v.z.clamp(-1.0, 1.0).acos();
    let phi = v.y.atan2(v.x);
    PureState::normalized(vec![
        c64((beta / 2.0).cos(), 0.0),
        C64::from_polar((beta / 2.0).sin(), phi),
    ])
    .expect("unit Bloch vector")
}

/// |ψ₁⟩, |ψ₂⟩
pub fn input_states(theta: f64) -> [PureState; 2] {
    let (s, c) = theta.sin_cos();
    [
        pure_from_bloch(BlochVector::unchecked(c, 0.0, s)),
        pure_from_bloch(BlochVector::unchecked(c, 0.0, -s)),
    ]
}

/// |φ±⟩ prepared after the Helstrom measurement.
pub fn prepared_states(theta: f64) -> [PureState; 2] {
    let (s, c) = theta.sin_cos();
    let r = (s.powi(4) + c * c).sqrt();
    if r < 1e-300 {
        return input_states(theta);
    }
    [
        pure_from_bloch(BlochVector::unchecked(c / r, 0.0, s * s / r)),
        pure_from_bloch(BlochVector::unchecked(c / r, 0.0, -s * s / r)),
    ]
}

/// p σ_z ρ σ_z + (1 − p) ρ
pub fn dephase(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_p(p)?;
    if rho.dim() != 2 {
        return Err(QfcError::DimensionMismatch(format!("dephasing a dim-{} state", rho.dim())));
    }
    let z = sigma_z();
    let m = (&z * rho.matrix() * &z).scale(p) + rho.matrix().scale(1.0 - p);
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Apply σ_z with probability p.
pub fn dephase_sampled(rho: &DensityMatrix, p: f64, rng: &mut RngStream) -> Result<DensityMatrix> {
    check_p(p)?;
    if rng.bernoulli(p) {
        rho.conjugate_by(&sigma_z())
    } else {
        Ok(rho.clone())
    }
}

/// F₁ = 1 − p cos²θ
pub fn f1_do_nothing(p: f64, theta: f64) -> f64 {
    1.0 - p * theta.cos().powi(2)
}

/// F₂ = 1 − ½(sin²θ − sin³θ)
pub fn f2_naive(theta: f64) -> f64 {
    let s = theta.sin();
    1.0 - 0.5 * (s * s - s * s * s)
}

/// F₃ = ½ + ½√(sin⁴θ + cos²θ)
pub fn f3_discriminate_prepare(_p: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    0.5 + 0.5 * (s.powi(4) + c * c).sqrt()
}

/// ½(1 + sin θ)
pub fn helstrom_prob(theta: f64) -> f64 {
    0.5 * (1.0 + theta.sin())
}

/// F₄ = ½(1 + √(cos²θ + sin⁴θ/(1 − (1−2p)²cos²θ)))
pub fn f4_closed(p: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let q = 1.0 - 2.0 * p;
    let den = 1.0 - q * q * c * c;
    if den < 1e-15 {
        // p → 0 and θ → 0 together: states identical and noiseless
        return 1.0;
    }
    0.5 * (1.0 + (c * c + s.powi(4) / den).sqrt())
}

/// η = arctan[((1−2p) cos θ tan χ)⁻¹] in [0, π/2].
pub fn feedback_angle(p: f64, theta: f64, chi: f64) -> f64 {
    let q = 1.0 - 2.0 * p;
    chi.cos().atan2(q * theta.cos() * chi.sin()).clamp(0.0, FRAC_PI_2)
}

/// Z_η = exp(−iησ_z/2)
pub fn z_rotation(eta: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[C64::from_polar(1.0, -eta / 2.0), c64(0.0, 0.0), c64(0.0, 0.0), C64::from_polar(1.0, eta / 2.0)],
    )
}

/// (M₀, M₁) in the σ_y eigenbasis with strength angle χ.
pub fn weak_measurement_ops(chi: f64) -> [ComplexMatrix; 2] {
    let (s, c) = (chi / 2.0).sin_cos();
    // |±i⟩⟨±i| = (I ± σ_y)/2
    let i2 = ComplexMatrix::identity(2, 2);
    let py = sigma_y();
    let plus = (&i2 + &py).scale(0.5);
    let minus = (&i2 - &py).scale(0.5);
    [plus.scale(c) + minus.scale(s), plus.scale(s) + minus.scale(c)]
}

/// Kraus pair of the feedback correction.
///
/// M₀ pushes the Bloch vector toward +y and M₁ toward −y, so the outcome-0
/// branch is rotated back by Z_{−η} and the outcome-1 branch by Z_{+η}.
pub fn correction_kraus(p: f64, theta: f64, chi: f64) -> [ComplexMatrix; 2] {
    let eta = feedback_angle(p, theta, chi);
    let [m0, m1] = weak_measurement_ops(chi);
    [z_rotation(-eta) * m0, z_rotation(eta) * m1]
}

/// Deterministic correction channel Σ K ρ K†.
pub fn correction_channel(rho: &DensityMatrix, p: f64, theta: f64, chi: f64) -> Result<DensityMatrix> {
    let mut acc = ComplexMatrix::zeros(2, 2);
    for k in correction_kraus(p, theta, chi) {
        acc += &k * rho.matrix() * k.adjoint();
    }
    Ok(DensityMatrix::from_matrix_unchecked(acc))
}

/// Sample the weak measurement and apply the matching rotation.
pub fn weak_feedback_correct(rho: &DensityMatrix, p: f64, theta: f64, chi: f64, rng: &mut RngStream) -> Result<DensityMatrix> {
    check_p(p)?;
    check_theta(theta)?;
    let ks = correction_kraus(p, theta, chi);
    let unnorm0 = &ks[0] * rho.matrix() * ks[0].adjoint();
    let p0 = unnorm0.trace().re;
    let (m, prob) = if rng.uniform() < p0 {
        (unnorm0, p0)
    } else {
        let u1 = &ks[1] * rho.matrix() * ks[1].adjoint();
        let p1 = u1.trace().re;
        (u1, p1)
    };
    if !(prob > 1e-15) {
        return Err(QfcError::ImpossibleOutcome { outcome: 0, prob });
    }
    Ok(DensityMatrix::from_matrix_unchecked(m.unscale(prob)))
}

/// Average fidelity of the exact correction channel at strength χ.
pub fn weak_feedback_fidelity(p: f64, theta: f64, chi: f64) -> Result<f64> {
    check_p(p)?;
    check_theta(theta)?;
    let mut f = 0.0;
    for psi in input_states(theta) {
        let rho = psi.density();
        let out = correction_channel(&dephase(&rho, p)?, p, theta, chi)?;
        f += 0.5 * out.expect(rho.matrix());
    }
    Ok(f)
}

/// Golden-section maximum of [`weak_feedback_fidelity`] over χ ∈ [0, π/2].
pub fn optimal_chi(p: f64, theta: f64) -> Result<(f64, f64)> {
    let f = |x: f64| weak_feedback_fidelity(p, theta, x);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, FRAC_PI_2);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > CHI_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    // the optimum can sit on an endpoint
    let mut best = (0.5 * (a + b), f(0.5 * (a + b))?);
    for x in [0.0, FRAC_PI_2] {
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// χ* maximizing the exact channel fidelity: sin χ* = (sin²θ/D)/√(sin⁴θ/D + cos²θ),
/// D = 1 − (1−2p)²cos²θ.
pub fn optimal_chi_closed(p: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let q = 1.0 - 2.0 * p;
    let den = 1.0 - q * q * c * c;
    if den < 1e-15 {
        return 0.0;
    }
    let a = s * s / den;
    (a / (a * s * s + c * c).sqrt()).clamp(0.0, 1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    DoNothing,
    DiscriminatePrepare,
    WeakFeedback { chi_bits: u64 },
}

impl Scheme {
    pub fn weak(chi: f64) -> Self {
        Scheme::WeakFeedback { chi_bits: chi.to_bits() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl McEstimate {
    fn from_stats(s: &EnsembleStats) -> Self {
        McEstimate {
            mean: s.mean[0],
            std_error: s.std_error()[0],
            samples: s.n,
        }
    }

    /// |mean − target| in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Monte-Carlo average fidelity. Sample `i` uses input `i mod 2` and stream `i`.
pub fn simulate(scheme: Scheme, p: f64, theta: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_p(p)?;
    check_theta(theta)?;
    let inputs = input_states(theta).map(|s| s.density());
    let prepared = prepared_states(theta).map(|s| s.density());
    let z0 = DensityMatrix::basis(2, 0);
    let stats = run_ensemble(samples, seed, 1, |rng, out| {
        let which = (rng.stream_id() % 2) as usize;
        let target = &inputs[which];
        let noisy = dephase_sampled(target, p, rng)?;
        let fin = match scheme {
            Scheme::DoNothing => noisy,
            Scheme::DiscriminatePrepare => {
                // σ_z basis: outcome |0⟩ ⇒ guess ψ₁
                let p0 = noisy.expect(z0.matrix());
                if rng.uniform() < p0 {
                    prepared[0].clone()
                } else {
                    prepared[1].clone()
                }
            }
            Scheme::WeakFeedback { chi_bits } => {
                weak_feedback_correct(&noisy, p, theta, f64::from_bits(chi_bits), rng)?
            }
        };
        out[0] = fin.expect(target.matrix());
        Ok(())
    })?;
    Ok(McEstimate::from_stats(&stats))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub p: f64,
    pub theta: f64,
    pub f1: f64,
    pub f3: f64,
    pub f4: f64,
    pub gap: f64,
    pub chi_opt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSurface {
    pub rows: Vec<GapRow>,
    pub argmax: (f64, f64),
    pub max: f64,
    pub min: f64,
}

/// F₄ − max(F₁, F₃) on an inclusive `n_p × n_theta` grid over [0, ½] × [0, π/2].
pub fn gap_surface(n_p: usize, n_theta: usize) -> Result<GapSurface> {
    if n_p < 2 || n_theta < 2 {
        return Err(QfcError::OutOfRange {
            field: "grid",
            value: n_p.min(n_theta) as f64,
        });
    }
    let rows: Vec<GapRow> = (0..n_p * n_theta)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n_theta, idx % n_theta);
            let p = 0.5 * i as f64 / (n_p - 1) as f64;
            let theta = FRAC_PI_2 * j as f64 / (n_theta - 1) as f64;
            let f1 = f1_do_nothing(p, theta);
            let f3 = f3_discriminate_prepare(p, theta);
            let f4 = f4_closed(p, theta);
            GapRow {
                p,
                theta,
                f1,
                f3,
                f4,
                gap: f4 - f1.max(f3),
                chi_opt: optimal_chi_closed(p, theta),
            }
        })
        .collect();
    let mut best = rows[0];
    let mut min = f64::INFINITY;
    for r in &rows {
        if r.gap > best.gap {
            best = *r;
        }
        min = min.min(r.gap);
    }
    Ok(GapSurface {
        argmax: (best.p, best.theta),
        max: best.gap,
        min,
        rows,
    })
}

pub fn bloch_of(rho: &DensityMatrix) -> Result<BlochVector> {
    qfc_qstate::bloch_from_density(rho)
}

pub fn qubit(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    density_from_bloch(&BlochVector::new(x, y, z)?)
}
