//! Dense complex matrices for small dimensions.
//!
//! Everything is a thin layer over `nalgebra::DMatrix<Complex64>`; the
//! Hermitian eigensolver is nalgebra's `symmetric_eigen`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QfcError, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(d, d)
}

/// Build a square matrix from row-major real entries.
pub fn from_real_rows(d: usize, entries: &[f64]) -> Result<ComplexMatrix> {
    if entries.len() != d * d {
        return Err(QfcError::DimensionMismatch(format!(
            "{} entries for a {d}x{d} matrix",
            entries.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| c64(entries[i * d + j], 0.0)))
}

/// Kronecker product, first factor most significant.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut out = identity(1);
    for f in factors {
        out = out.kronecker(*f);
    }
    out
}

pub fn checked_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.ncols() != b.nrows() {
        return Err(QfcError::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b)
}

pub fn checked_add(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_shape(a, b)?;
    Ok(a + b)
}

pub fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(QfcError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

pub fn require_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(QfcError::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// max |a_ij|
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// max |a_ij - conj(a_ji)|
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let n = a.nrows().min(a.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascending,
/// eigenvectors in the matching columns.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = hermitian_part(a).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// f(A) = V f(Λ) V† for Hermitian A.
pub fn hermitian_function(a: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let (vals, v) = hermitian_eigen(a);
    let mut scaled = v.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let fl = f(lam);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= fl;
        }
    }
    scaled * v.adjoint()
}

/// exp(-i H t) for Hermitian H.
pub fn unitary_from_hamiltonian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    hermitian_function(h, |lam| C64::from_polar(1.0, -lam * t))
}

/// exp(-i θ G / 2) for a Pauli-like generator with G² = I.
pub fn pauli_rotation(g: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let d = g.nrows();
    identity(d).scale((theta / 2.0).cos()) - g * c64(0.0, (theta / 2.0).sin())
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    let d = u.nrows();
    u.nrows() == u.ncols() && max_abs(&(u * u.adjoint() - identity(d))) <= tol
}

/// Real part of Tr(a b) without forming the product.
pub fn trace_product_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}
