//! Entangling two qubits by monitoring σ_z⊗σ_z and applying feedback.
//!
//! The monitored observable splits the two-qubit space into the
//! decoherence-free blocks D₊ = span{|00⟩, |11⟩} and D₋ = span{|01⟩, |10⟩}.
//! We describe a state by two encoded qubits that factor the space:
//!
//! * `q1` (which block): X = I⊗σ_x, Y = σ_z⊗σ_y, Z = σ_z⊗σ_z
//! * `q2` (inside the block): X = σ_x⊗σ_x, Y = σ_y⊗σ_x, Z = σ_z⊗I
//!
//! Each triple obeys the Pauli algebra and every operator of one triple
//! commutes with every operator of the other. The protocol first purifies
//! `q1` and parks it on D₋, then purifies `q2` along +x, which lands on |Ψ⁺⟩.

use qfc_qstate::matrix::{pauli_rotation, ComplexMatrix};
use qfc_qstate::ops::{basis_projector, hadamard, pauli2};
use qfc_qstate::state::bell;
use qfc_qstate::{r_squared, tensor_product, BlochVector, DensityMatrix, Pauli, QfcError, Result};
use qfc_sme::{sme_step_with, Positivity, SmeModel, StepOptions};
use qfc_stochastic::RngStream;
use rayon::prelude::*;

/// Minority-block weight at which the first stage ends.
pub const STAGE1_TOL: f64 = 1e-3;
/// Encoded purity (1 + |q2|²)/2 at which the second stage ends.
pub const STAGE2_PURITY: f64 = 0.995;
/// Default budget in units of k·t.
pub const DEFAULT_BUDGET_KT: f64 = 10.0;
/// Leakage below which a state is declared inside a block.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Plus,
    Minus,
}

pub fn plus_projector() -> ComplexMatrix {
    basis_projector(4, 0) + basis_projector(4, 3)
}

pub fn minus_projector() -> ComplexMatrix {
    basis_projector(4, 1) + basis_projector(4, 2)
}

fn in_plus(i: usize) -> bool {
    i == 0 || i == 3
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfsDecomposition {
    pub plus_block: ComplexMatrix,
    pub minus_block: ComplexMatrix,
    pub plus_weight: f64,
    pub minus_weight: f64,
    /// Σ |ρ_ij|² over entries coupling the two blocks.
    pub leakage: f64,
}

impl DfsDecomposition {
    pub fn dominant(&self) -> Block {
        if self.plus_weight >= self.minus_weight {
            Block::Plus
        } else {
            Block::Minus
        }
    }

    /// Population outside the dominant block.
    pub fn minority_weight(&self) -> f64 {
        self.plus_weight.min(self.minus_weight)
    }

    pub fn member(&self) -> Option<Block> {
        if self.leakage > MEMBERSHIP_TOL || self.minority_weight() > MEMBERSHIP_TOL {
            return None;
        }
        Some(self.dominant())
    }
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(QfcError::DimensionMismatch(format!("expected a two-qubit state, got dim {}", rho.dim())));
    }
    Ok(())
}

pub fn dfs_membership(rho: &DensityMatrix) -> Result<DfsDecomposition> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let mut leakage = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if in_plus(i) != in_plus(j) {
                leakage += m[(i, j)].norm_sqr();
            }
        }
    }
    let plus_weight = m[(0, 0)].re + m[(3, 3)].re;
    let minus_weight = m[(1, 1)].re + m[(2, 2)].re;
    Ok(DfsDecomposition {
        plus_block: plus_projector(),
        minus_block: minus_projector(),
        plus_weight,
        minus_weight,
        leakage,
    })
}

/// (H⊗H) ρ (H⊗H)
pub fn hadamard_toggle(rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_two_qubit(rho)?;
    let h = hadamard();
    rho.conjugate_by(&tensor_product(&h, &h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodedQubits {
    pub q1: BlochVector,
    pub q2: BlochVector,
}

impl EncodedQubits {
    /// (1 + |q2|²)/2
    pub fn q2_purity(&self) -> f64 {
        0.5 * (1.0 + self.q2.norm_sq())
    }
}

/// Operators (X, Y, Z) of the block qubit.
pub fn q1_operators() -> [ComplexMatrix; 3] {
    use Pauli::*;
    [pauli2(I, X), pauli2(Z, Y), pauli2(Z, Z)]
}

/// Operators (X, Y, Z) of the in-block qubit.
pub fn q2_operators() -> [ComplexMatrix; 3] {
    use Pauli::*;
    [pauli2(X, X), pauli2(Y, X), pauli2(Z, I)]
}

fn bloch_of(rho: &DensityMatrix, ops: &[ComplexMatrix; 3]) -> BlochVector {
    BlochVector::unchecked(rho.expect(&ops[0]), rho.expect(&ops[1]), rho.expect(&ops[2]))
}

pub fn encoded_coords(rho: &DensityMatrix) -> Result<EncodedQubits> {
    check_two_qubit(rho)?;
    Ok(EncodedQubits {
        q1: bloch_of(rho, &q1_operators()),
        q2: bloch_of(rho, &q2_operators()),
    })
}

/// One step of continuous σ_z⊗σ_z monitoring at strength k.
pub fn two_qubit_sme_step(rho: &DensityMatrix, k: f64, dt: f64, dw: f64) -> Result<DensityMatrix> {
    check_two_qubit(rho)?;
    let model = zz_model(k)?;
    qfc_sme::sme_step(&model, 0.0, rho, dt, &[dw])
}

fn zz_model(k: f64) -> Result<SmeModel> {
    SmeModel::continuous_measurement(pauli2(Pauli::Z, Pauli::Z), k)
}

/// ⟨Ψ⁺|ρ|Ψ⁺⟩
pub fn fidelity_to_bell(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    let psi = bell::psi_plus();
    let a = psi.amplitudes();
    Ok((a.adjoint() * rho.matrix() * a)[(0, 0)].re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub k: f64,
    pub dt: f64,
    /// Budget in time units.
    pub horizon: f64,
    pub seed: u64,
    pub stage1_tol: f64,
    pub stage2_purity: f64,
    pub sample_every: u64,
}

impl ProtocolConfig {
    pub fn new(k: f64, dt: f64, seed: u64) -> Self {
        ProtocolConfig {
            k,
            dt,
            horizon: DEFAULT_BUDGET_KT / k,
            seed,
            stage1_tol: STAGE1_TOL,
            stage2_purity: STAGE2_PURITY,
            sample_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(QfcError::OutOfRange { field: "k", value: self.k });
        }
        if !(self.dt > 0.0) || self.dt * self.k > 1e-2 {
            return Err(QfcError::OutOfRange { field: "dt", value: self.dt });
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(QfcError::OutOfRange { field: "horizon", value: self.horizon });
        }
        if !(self.stage1_tol > 0.0 && self.stage1_tol < 0.5) {
            return Err(QfcError::OutOfRange { field: "stage1_tol", value: self.stage1_tol });
        }
        if !(self.stage2_purity > 0.5 && self.stage2_purity < 1.0) {
            return Err(QfcError::OutOfRange { field: "stage2_purity", value: self.stage2_purity });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSample {
    pub t: f64,
    pub r_squared: f64,
    pub leakage: f64,
    pub q1_z: f64,
    pub q2_purity: f64,
    pub fidelity_to_bell: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub samples: Vec<ProtocolSample>,
    pub final_state: DensityMatrix,
    pub stage1_time: f64,
    pub stage2_time: f64,
    pub final_r_squared: f64,
    pub final_fidelity: f64,
}

fn sample(t: f64, rho: &DensityMatrix) -> Result<ProtocolSample> {
    let enc = encoded_coords(rho)?;
    Ok(ProtocolSample {
        t,
        r_squared: r_squared(rho)?,
        leakage: dfs_membership(rho)?.leakage,
        q1_z: enc.q1.z,
        q2_purity: enc.q2_purity(),
        fidelity_to_bell: fidelity_to_bell(rho)?,
    })
}

fn rotate(rho: &DensityMatrix, generator: &ComplexMatrix, angle: f64) -> Result<DensityMatrix> {
    if angle == 0.0 {
        return Ok(rho.clone());
    }
    rho.conjugate_by(&pauli_rotation(generator, angle))
}

/// Rotation about q1's x axis taking its (y, z) component to polar angle `target`.
fn steer_q1(rho: &DensityMatrix, target: f64) -> Result<DensityMatrix> {
    let q1 = encoded_coords(rho)?.q1;
    if q1.y.hypot(q1.z) < 1e-15 {
        return Ok(rho.clone());
    }
    let [x_b, _, _] = q1_operators();
    rotate(rho, &x_b, target - q1.z.atan2(q1.y))
}

/// Rotation about q2's z axis taking its (x, y) component to azimuth `target`.
fn steer_q2(rho: &DensityMatrix, target: f64) -> Result<DensityMatrix> {
    let q2 = encoded_coords(rho)?.q2;
    if q2.x.hypot(q2.y) < 1e-15 {
        return Ok(rho.clone());
    }
    let [_, _, z_c] = q2_operators();
    rotate(rho, &z_c, target - q2.y.atan2(q2.x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Block,
    Bell,
    Done,
}

/// Two-stage feedback protocol driving `rho0` toward |Ψ⁺⟩.
///
/// Stage one monitors σ_z⊗σ_z and rotates q1 about its x axis after every
/// step to keep ⟨σ_z⊗σ_z⟩ = 0. Once (1 − |q1|)/2 ≤ `stage1_tol` q1 is turned
/// onto D₋. Stage two monitors σ_x⊗σ_x (Hadamard-conjugated σ_z⊗σ_z) and
/// keeps q2.x = 0 by rotating about σ_z⊗I until q2 reaches the purity
/// threshold, then turns q2 onto +x.
pub fn entangle_protocol_with(rho0: &DensityMatrix, cfg: &ProtocolConfig, rng: &mut RngStream) -> Result<ProtocolOutcome> {
    check_two_qubit(rho0)?;
    cfg.validate()?;
    let model = zz_model(cfg.k)?;
    let opts = StepOptions {
        renormalize: true,
        positivity: Positivity::Clip,
    };
    let every = cfg.sample_every.max(1);
    let max_steps = (cfg.horizon / cfg.dt).round() as u64;
    let mut rho = rho0.clone();
    let mut samples = vec![sample(0.0, &rho)?];
    let mut stage = Stage::Block;
    let (mut t1, mut t2) = (0.0, 0.0);
    let mut n = 0u64;
    loop {
        let t = n as f64 * cfg.dt;
        if stage == Stage::Block {
            let q1 = encoded_coords(&rho)?.q1;
            if 0.5 * (1.0 - q1.norm()) <= cfg.stage1_tol {
                rho = steer_q1(&rho, -std::f64::consts::FRAC_PI_2)?;
                stage = Stage::Bell;
                t1 = t;
            }
        }
        if stage == Stage::Bell {
            let enc = encoded_coords(&rho)?;
            if enc.q2_purity() >= cfg.stage2_purity {
                rho = steer_q2(&rho, 0.0)?;
                stage = Stage::Done;
                t2 = t;
            }
        }
        if stage == Stage::Done {
            let fin = sample(t, &rho)?;
            match samples.last_mut() {
                Some(last) if last.t == t => *last = fin,
                _ => samples.push(fin),
            }
            break;
        }
        if n >= max_steps {
            let last = match stage {
                Stage::Block => 0.5 * (1.0 - encoded_coords(&rho)?.q1.norm()),
                _ => encoded_coords(&rho)?.q2_purity(),
            };
            return Err(QfcError::HorizonExhausted {
                t,
                what: if stage == Stage::Block { "block purification" } else { "in-block purification" },
                last,
            });
        }
        let dw = rng.wiener(cfg.dt);
        rho = match stage {
            Stage::Block => {
                let next = sme_step_with(&model, t, &rho, cfg.dt, &[dw], opts)?;
                steer_q1(&next, 0.0)?
            }
            _ => {
                let toggled = hadamard_toggle(&rho)?;
                let next = hadamard_toggle(&sme_step_with(&model, t, &toggled, cfg.dt, &[dw], opts)?)?;
                steer_q2(&next, std::f64::consts::FRAC_PI_2)?
            }
        };
        n += 1;
        if n % every == 0 {
            samples.push(sample(n as f64 * cfg.dt, &rho)?);
        }
    }
    let final_r_squared = r_squared(&rho)?;
    let final_fidelity = fidelity_to_bell(&rho)?;
    Ok(ProtocolOutcome {
        samples,
        final_state: rho,
        stage1_time: t1,
        stage2_time: t2,
        final_r_squared,
        final_fidelity,
    })
}

pub fn entangle_protocol(rho0: &DensityMatrix, cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    entangle_protocol_with(rho0, cfg, &mut RngStream::new(cfg.seed, 0))
}

/// Run `n` independent protocols; run `i` uses stream `i` of `cfg.seed`.
pub fn entangle_ensemble(rho0: &DensityMatrix, cfg: &ProtocolConfig, n: u64) -> Vec<Result<ProtocolOutcome>> {
    (0..n)
        .into_par_iter()
        .map(|i| entangle_protocol_with(rho0, cfg, &mut RngStream::new(cfg.seed, i)).map_err(|e| e.in_trajectory(i)))
        .collect()
}

/// Arbitrary local unitary U₁⊗U₂ from two sets of ZYZ Euler angles.
pub fn local_unitary(a: [f64; 3], b: [f64; 3]) -> ComplexMatrix {
    let one = |e: [f64; 3]| {
        let z = Pauli::Z.matrix();
        let y = Pauli::Y.matrix();
        pauli_rotation(&z, e[0]) * pauli_rotation(&y, e[1]) * pauli_rotation(&z, e[2])
    };
    tensor_product(&one(a), &one(b))
}

/// I/4
pub fn maximally_mixed() -> DensityMatrix {
    DensityMatrix::maximally_mixed(4)
}
