//! Density matrices and pure states.

use crate::error::{QfcError, Result};
use crate::matrix::{
    c64, hermitian_eigenvalues, hermitian_part, hermiticity_defect, identity, require_square,
    trace_product_re, ComplexMatrix, C64,
};
use nalgebra::DVector;

/// Entropy ignores eigenvalues at or below this.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub psd: f64,
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-9,
            psd: 1e-9,
            trace: 1e-9,
        }
    }
}

/// Unit-trace positive semidefinite matrix.
///
/// A density matrix built with [`DensityMatrix::raw`] is only checked for
/// finite entries and unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
    tol: Tolerances,
    raw: bool,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: Tolerances) -> Result<Self> {
        let rho = DensityMatrix { m, tol, raw: false };
        rho.validate()?;
        Ok(rho)
    }

    /// Accept a non-Hermitian fixture verbatim.
    pub fn raw(m: ComplexMatrix) -> Result<Self> {
        let rho = DensityMatrix {
            m,
            tol: Tolerances::default(),
            raw: true,
        };
        rho.validate()?;
        Ok(rho)
    }

    /// Wrap without checks. Hot loops use this and validate at the end.
    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        DensityMatrix {
            m,
            tol: Tolerances::default(),
            raw: false,
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_matrix_unchecked(identity(d).scale(1.0 / d as f64))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        Self::from_matrix_unchecked(crate::ops::basis_projector(d, i))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        Self::from_matrix_unchecked(v * v.adjoint())
    }

    /// G G† / Tr(G G†) with G built from 2d² reals (real parts then imaginary).
    pub fn from_ginibre(d: usize, params: &[f64]) -> Result<Self> {
        if params.len() != 2 * d * d {
            return Err(QfcError::DimensionMismatch(format!(
                "ginibre needs {} reals, got {}",
                2 * d * d,
                params.len()
            )));
        }
        let g = ComplexMatrix::from_fn(d, d, |i, j| c64(params[i * d + j], params[d * d + i * d + j]));
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        if tr < 1e-300 {
            return Err(QfcError::DegenerateInput("zero ginibre matrix".into()));
        }
        Self::new(m.unscale(tr))
    }

    pub fn validate(&self) -> Result<()> {
        let d = require_square(&self.m, "density matrix")?;
        if self.m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QfcError::InvalidState("non-finite entry".into()));
        }
        if !self.raw {
            let h = hermiticity_defect(&self.m);
            if h > self.tol.hermiticity {
                return Err(QfcError::InvalidState(format!("not Hermitian (defect {h:e})")));
            }
        }
        let tr = self.m.trace();
        if (tr.re - 1.0).abs() > self.tol.trace || tr.im.abs() > self.tol.trace {
            return Err(QfcError::InvalidState(format!("trace {tr} != 1")));
        }
        if self.raw {
            // spectrum of a non-Hermitian matrix is not a positivity test
            return Ok(());
        }
        let lo = hermitian_eigenvalues(&self.m)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if lo < -self.tol.psd {
            return Err(QfcError::InvalidState(format!(
                "negative eigenvalue {lo:e} (d = {d})"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn is_raw(&self) -> bool {
        self.raw
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Re Tr(ρ A)
    pub fn expect(&self, op: &ComplexMatrix) -> f64 {
        trace_product_re(&self.m, op)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    /// U ρ U†
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(QfcError::DimensionMismatch(format!(
                "unitary {:?} on state of dim {}",
                u.shape(),
                self.dim()
            )));
        }
        Ok(DensityMatrix {
            m: u * &self.m * u.adjoint(),
            tol: self.tol,
            raw: self.raw,
        })
    }

    /// (ρ + ρ†)/2 with trace reset to 1.
    pub fn symmetrized(&self) -> Self {
        let h = hermitian_part(&self.m);
        let tr = h.trace().re;
        DensityMatrix {
            m: h.unscale(tr),
            tol: self.tol,
            raw: false,
        }
    }
}

/// Tr(ρ²)
pub fn purity(rho: &DensityMatrix) -> f64 {
    trace_product_re(rho.matrix(), rho.matrix())
}

/// −Σ λ ln λ over eigenvalues above [`ENTROPY_CUTOFF`].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&l| l > ENTROPY_CUTOFF)
        .map(|l| -l * l.ln())
        .sum()
}

/// Linear fidelity Re Tr(a b), clamped to [0, 1 + 1e-9].
pub fn fidelity_trace(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QfcError::DimensionMismatch(format!(
            "fidelity of dim {} with dim {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(trace_product_re(a.matrix(), b.matrix()).clamp(0.0, 1.0 + 1e-9))
}

/// Reduced state of subsystem `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: usize) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != rho.dim() {
        return Err(QfcError::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not factor dimension {}",
            rho.dim()
        )));
    }
    if keep >= dims.len() {
        return Err(QfcError::DimensionMismatch(format!(
            "keep index {keep} with {} subsystems",
            dims.len()
        )));
    }
    let dk = dims[keep];
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for o in 0..outer {
                for n in 0..inner {
                    let r = (o * dk + a) * inner + n;
                    let c = (o * dk + b) * inner + n;
                    acc += m[(r, c)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix {
        m: out,
        tol: rho.tol,
        raw: rho.raw,
    })
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(QfcError::InvalidState("empty amplitude vector".into()));
        }
        let v = DVector::from_vec(amps);
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(QfcError::InvalidState(format!("squared norm {n2} != 1")));
        }
        Ok(PureState { amps: v })
    }

    /// Normalize any nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amps);
        let n = v.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(QfcError::DegenerateInput("zero vector".into()));
        }
        Ok(PureState { amps: v.unscale(n) })
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = DVector::zeros(d);
        v[i] = c64(1.0, 0.0);
        PureState { amps: v }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Bell and related two-qubit fixtures, basis |00>,|01>,|10>,|11>.
pub mod bell {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2 as R;

    fn vec4(a: [f64; 4]) -> PureState {
        PureState::new(a.iter().map(|&x| c64(x, 0.0)).collect()).expect("normalized fixture")
    }

    pub fn phi_plus() -> PureState {
        vec4([R, 0.0, 0.0, R])
    }

    pub fn phi_minus() -> PureState {
        vec4([R, 0.0, 0.0, -R])
    }

    pub fn psi_plus() -> PureState {
        vec4([0.0, R, R, 0.0])
    }

    pub fn psi_minus() -> PureState {
        vec4([0.0, R, -R, 0.0])
    }
}
