//! The element-squaring map S, its XOR + post-selection realization, and
//! the iterated map F = U ∘ S.

use qfc_qstate::matrix::{c64, max_abs, tensor_product, ComplexMatrix};
use qfc_qstate::state::bell;
use qfc_qstate::{fidelity_trace, DensityMatrix, QfcError, Result, C64};

/// Inputs whose Σ ρ_ii² falls below this are rejected.
pub const DEGENERATE_NORM: f64 = 1e-15;

fn wrap(m: ComplexMatrix, raw: bool) -> Result<DensityMatrix> {
    if raw {
        DensityMatrix::raw(m)
    } else {
        Ok(DensityMatrix::from_matrix_unchecked(m))
    }
}

/// ρ_ij → ρ_ij² / Σ_i ρ_ii². Returns the new state and Σ_i ρ_ii², the
/// post-selection success probability. Raw inputs can carry complex
/// diagonals; the complex sum keeps the trace at 1 and its real part is
/// reported.
pub fn square_elements(rho: &DensityMatrix, raw_allowed: bool) -> Result<(DensityMatrix, f64)> {
    if rho.is_raw() && !raw_allowed {
        return Err(QfcError::InvalidState("raw state passed without raw_allowed".into()));
    }
    let m = rho.matrix();
    let norm: C64 = (0..rho.dim()).map(|i| m[(i, i)] * m[(i, i)]).sum();
    if norm.norm() < DEGENERATE_NORM {
        return Err(QfcError::DegenerateInput(format!("Σρ_ii² = {norm:e}")));
    }
    let out = m.map(|z| z * z / norm);
    Ok((wrap(out, rho.is_raw())?, norm.re))
}

/// Permutation |i⟩|j⟩ → |i⟩|j ⊖ i⟩: bitwise XOR when `d` is a power of two
/// (one CNOT per qubit pair), subtraction mod d otherwise.
pub fn xor_gate(d: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let target = if d.is_power_of_two() { i ^ j } else { (j + d - i) % d };
            u[(i * d + target, i * d + j)] = c64(1.0, 0.0);
        }
    }
    u
}

/// S realized on two copies: ρ⊗ρ, XOR, keep the pair when the second
/// register reads |0⟩, trace the second register out.
pub fn xor_postselect(rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let d = rho.dim();
    let u = xor_gate(d);
    let pair = tensor_product(rho.matrix(), rho.matrix());
    let mut proj = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        proj[(i * d, i * d)] = c64(1.0, 0.0);
    }
    let kept = &proj * &u * pair * u.adjoint() * &proj;
    let mut out = ComplexMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += kept[(a * d + k, b * d + k)];
            }
            out[(a, b)] = acc;
        }
    }
    let prob = out.trace();
    if prob.norm() < DEGENERATE_NORM {
        return Err(QfcError::DegenerateInput(format!("post-selection probability {prob:e}")));
    }
    Ok((wrap(out.map(|z| z / prob), rho.is_raw())?, prob.re))
}

/// U(x, φ) = [[cos x, sin x e^{iφ}], [−sin x e^{−iφ}, cos x]]
pub fn su2(x: f64, phi: f64) -> ComplexMatrix {
    let (s, c) = x.sin_cos();
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            c64(c, 0.0),
            C64::from_polar(s, phi),
            -C64::from_polar(s, -phi),
            c64(c, 0.0),
        ],
    )
}

/// U S[ρ] U† on one qubit, or (U⊗U) S[ρ] (U⊗U)† on two.
pub fn f_step(rho: &DensityMatrix, x: f64, phi: f64) -> Result<DensityMatrix> {
    let u = su2(x, phi);
    let full = match rho.dim() {
        2 => u,
        4 => tensor_product(&u, &u),
        d => {
            return Err(QfcError::DimensionMismatch(format!(
                "f_step acts on one or two qubits, got dim {d}"
            )))
        }
    };
    let (sq, _) = square_elements(rho, true)?;
    sq.conjugate_by(&full)
}

/// The perturbed |Ψ⁺⟩ fixture, kept verbatim (it is not Hermitian).
pub fn perturbed_bell_fixture() -> DensityMatrix {
    let r = |v: f64| c64(v, 0.0);
    let m = ComplexMatrix::from_row_slice(
        4,
        4,
        &[
            r(0.17), r(0.0), r(0.0), r(0.0),
            r(0.0), r(0.3), r(0.29), r(0.0),
            r(0.0), r(0.205), r(0.22), r(0.0),
            r(0.0), r(0.0), r(0.0), r(0.31),
        ],
    );
    DensityMatrix::raw(m).expect("fixture has unit trace")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellIteration {
    pub fidelities: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

/// Iterate F at (x, φ) and record Tr(ρ_{Ψ⁺} ρ_k) for k = 0..=n_steps.
pub fn bell_purify_iterate(rho0: &DensityMatrix, n_steps: usize, x: f64, phi: f64) -> Result<BellIteration> {
    if rho0.dim() != 4 {
        return Err(QfcError::DimensionMismatch(format!("expected 4×4, got {}", rho0.dim())));
    }
    let target = bell::psi_plus().density();
    let mut rho = rho0.clone();
    let mut out = BellIteration {
        fidelities: vec![fidelity_trace(&target, &rho)?],
        states: vec![rho.clone()],
    };
    for _ in 0..n_steps {
        rho = f_step(&rho, x, phi)?;
        out.fidelities.push(fidelity_trace(&target, &rho)?);
        out.states.push(rho.clone());
    }
    Ok(out)
}

/// ‖S[ρ] − xor_postselect(ρ)‖_max
pub fn realization_gap(rho: &DensityMatrix) -> Result<f64> {
    let (a, pa) = square_elements(rho, true)?;
    let (b, pb) = xor_postselect(rho)?;
    Ok(max_abs(&(a.matrix() - b.matrix())).max((pa - pb).abs()))
}
