//! Real coordinates: Bloch vectors for qubits, Fano coefficients for qubit pairs.

use crate::error::{QfcError, Result};
use crate::matrix::{c64, ComplexMatrix};
use crate::ops::{pauli2, sigma_x, sigma_y, sigma_z, Pauli};
use crate::state::DensityMatrix;

pub const BALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = BlochVector { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) || v.norm_sq() > 1.0 + BALL_TOL {
            return Err(QfcError::InvalidState(format!(
                "Bloch vector ({x}, {y}, {z}) outside the unit ball"
            )));
        }
        Ok(v)
    }

    pub const fn unchecked(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Radial projection back into the unit ball.
    pub fn clamped(self) -> Self {
        let n = self.norm();
        if n > 1.0 {
            BlochVector {
                x: self.x / n,
                y: self.y / n,
                z: self.z / n,
            }
        } else {
            self
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }
}

pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(QfcError::DimensionMismatch(format!(
            "Bloch vector of a dim-{} state",
            rho.dim()
        )));
    }
    Ok(BlochVector {
        x: rho.expect(&sigma_x()),
        y: rho.expect(&sigma_y()),
        z: rho.expect(&sigma_z()),
    })
}

/// (I + a·σ)/2
pub fn density_from_bloch(v: &BlochVector) -> Result<DensityMatrix> {
    let v = BlochVector::new(v.x, v.y, v.z)?;
    Ok(DensityMatrix::from_matrix_unchecked(bloch_matrix(&v)))
}

pub(crate) fn bloch_matrix(v: &BlochVector) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            c64(0.5 * (1.0 + v.z), 0.0),
            c64(0.5 * v.x, -0.5 * v.y),
            c64(0.5 * v.x, 0.5 * v.y),
            c64(0.5 * (1.0 - v.z), 0.0),
        ],
    )
}

/// r_ij = Tr((σ_i ⊗ σ_j) ρ), indices in I, X, Y, Z order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoCoefficients {
    pub r: [[f64; 4]; 4],
}

impl FanoCoefficients {
    pub fn new(r: [[f64; 4]; 4]) -> Result<Self> {
        if (r[0][0] - 1.0).abs() > BALL_TOL {
            return Err(QfcError::InvalidState(format!("r_II = {} != 1", r[0][0])));
        }
        if let Some(bad) = r.iter().flatten().find(|v| !(v.abs() <= 1.0 + BALL_TOL)) {
            return Err(QfcError::InvalidState(format!("|r_ij| = {bad} > 1")));
        }
        Ok(FanoCoefficients { r })
    }

    pub fn get(&self, a: Pauli, b: Pauli) -> f64 {
        self.r[a.index()][b.index()]
    }

    /// Local Bloch vector of the first qubit.
    pub fn local_a(&self) -> BlochVector {
        BlochVector::unchecked(self.r[1][0], self.r[2][0], self.r[3][0])
    }

    pub fn local_b(&self) -> BlochVector {
        BlochVector::unchecked(self.r[0][1], self.r[0][2], self.r[0][3])
    }

    /// ρ = ¼ Σ r_ij σ_i ⊗ σ_j
    pub fn to_density(&self) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let r = self.get(a, b);
                if r != 0.0 {
                    m += pauli2(a, b).scale(0.25 * r);
                }
            }
        }
        DensityMatrix::from_matrix_unchecked(m)
    }
}

pub fn fano_decompose(rho: &DensityMatrix) -> Result<FanoCoefficients> {
    if rho.dim() != 4 {
        return Err(QfcError::DimensionMismatch(format!(
            "Fano form of a dim-{} state",
            rho.dim()
        )));
    }
    let mut r = [[0.0; 4]; 4];
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            r[a.index()][b.index()] = rho.expect(&pauli2(a, b));
        }
    }
    Ok(FanoCoefficients { r })
}

/// Squared norm of the 3×3 correlation block.
pub fn fano_r_squared(f: &FanoCoefficients) -> f64 {
    let mut s = 0.0;
    for i in 1..4 {
        for j in 1..4 {
            s += f.r[i][j] * f.r[i][j];
        }
    }
    s
}

pub fn r_squared(rho: &DensityMatrix) -> Result<f64> {
    fano_decompose(rho).map(|f| fano_r_squared(&f))
}
