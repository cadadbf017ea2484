//! Standard operators.

use crate::error::{QfcError, Result};
use crate::matrix::{c64, identity, tensor_product, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => identity(2),
            Pauli::X => sigma_x(),
            Pauli::Y => sigma_y(),
            Pauli::Z => sigma_z(),
        }
    }
}

fn m2(a: C64, b: C64, c: C64, d: C64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn sigma_x() -> ComplexMatrix {
    let (o, l) = (c64(0.0, 0.0), c64(1.0, 0.0));
    m2(o, l, l, o)
}

pub fn sigma_y() -> ComplexMatrix {
    let o = c64(0.0, 0.0);
    m2(o, c64(0.0, -1.0), c64(0.0, 1.0), o)
}

pub fn sigma_z() -> ComplexMatrix {
    let (o, l) = (c64(0.0, 0.0), c64(1.0, 0.0));
    m2(l, o, o, -l)
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    m2(c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0))
}

/// σ_a ⊗ σ_b
pub fn pauli2(a: Pauli, b: Pauli) -> ComplexMatrix {
    tensor_product(&a.matrix(), &b.matrix())
}

/// |i⟩⟨i| in dimension d.
pub fn basis_projector(d: usize, i: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, i)] = c64(1.0, 0.0);
    m
}

/// Spin-j matrices (F_x, F_y, F_z) in the basis m = j, j-1, ..., -j.
pub fn angular_momentum_ops(two_j: u32) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if two_j < 1 {
        return Err(QfcError::OutOfRange {
            field: "two_j",
            value: two_j as f64,
        });
    }
    let d = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let m_of = |i: usize| j - i as f64;

    let mut fz = ComplexMatrix::zeros(d, d);
    let mut fplus = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        fz[(i, i)] = c64(m_of(i), 0.0);
    }
    // F+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; |m+1> sits one row up
    for i in 1..d {
        let m = m_of(i);
        fplus[(i - 1, i)] = c64((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let fminus = fplus.adjoint();
    let fx = (&fplus + &fminus).scale(0.5);
    let fy = (&fplus - &fminus) * c64(0.0, -0.5);
    Ok((fx, fy, fz))
}
