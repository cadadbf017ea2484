use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qfc_qstate::matrix::{
    c64, from_real_rows, hermitian_eigenvalues, is_unitary, max_abs, unitary_from_hamiltonian,
};
use qfc_qstate::ops::{basis_projector, pauli2, sigma_x, sigma_y, sigma_z};
use qfc_qstate::state::bell;
use qfc_qstate::*;

fn rho_pert() -> DensityMatrix {
    let m = from_real_rows(
        4,
        &[
            0.17, 0.0, 0.0, 0.0, //
            0.0, 0.3, 0.29, 0.0, //
            0.0, 0.205, 0.22, 0.0, //
            0.0, 0.0, 0.0, 0.31,
        ],
    )
    .unwrap();
    DensityMatrix::raw(m).unwrap()
}

#[test]
fn tensor_product_examples() {
    let i2 = ComplexMatrix::identity(2, 2);
    assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4, 4));

    let zz = tensor_product(&sigma_z(), &sigma_z());
    let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
    assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    assert_eq!(max_abs(&(zz.clone() - ComplexMatrix::from_diagonal(&zz.diagonal()))), 0.0);

    let p01 = tensor_product(&basis_projector(2, 0), &basis_projector(2, 1));
    assert_eq!(p01, basis_projector(4, 1));
}

#[test]
fn partial_trace_examples() {
    let phi = bell::phi_plus().density();
    for keep in 0..2 {
        let red = partial_trace(&phi, &[2, 2], keep).unwrap();
        assert!(max_abs(&(red.matrix() - ComplexMatrix::identity(2, 2).scale(0.5))) < 1e-15);
    }

    let a = density_from_bloch(&BlochVector::new(0.3, -0.2, 0.5).unwrap()).unwrap();
    let b = density_from_bloch(&BlochVector::new(-0.1, 0.6, 0.1).unwrap()).unwrap();
    let ab = DensityMatrix::new(tensor_product(a.matrix(), b.matrix())).unwrap();
    let ra = partial_trace(&ab, &[2, 2], 0).unwrap();
    let rb = partial_trace(&ab, &[2, 2], 1).unwrap();
    assert!(max_abs(&(ra.matrix() - a.matrix())) < 1e-15);
    assert!(max_abs(&(rb.matrix() - b.matrix())) < 1e-15);

    let s01 = DensityMatrix::basis(4, 1);
    let r = partial_trace(&s01, &[2, 2], 0).unwrap();
    assert_eq!(r.matrix(), &basis_projector(2, 0));

    assert!(partial_trace(&s01, &[2, 3], 0).is_err());
    assert!(partial_trace(&s01, &[2, 2], 2).is_err());
}

#[test]
fn partial_trace_three_parties() {
    // |0><0| ⊗ I/3 ⊗ |1><1|, keep the middle qutrit
    let p0 = basis_projector(2, 0);
    let mixed3 = ComplexMatrix::identity(3, 3).scale(1.0 / 3.0);
    let p1 = basis_projector(2, 1);
    let m = tensor_product(&tensor_product(&p0, &mixed3), &p1);
    let rho = DensityMatrix::new(m).unwrap();
    let mid = partial_trace(&rho, &[2, 3, 2], 1).unwrap();
    assert!(max_abs(&(mid.matrix() - &mixed3)) < 1e-15);
    let last = partial_trace(&rho, &[2, 3, 2], 2).unwrap();
    assert!(max_abs(&(last.matrix() - &p1)) < 1e-15);
}

#[test]
fn fidelity_examples() {
    let f = fidelity_trace(&bell::psi_plus().density(), &rho_pert()).unwrap();
    assert_abs_diff_eq!(f, 0.5075, epsilon = 1e-12);

    let pure = bell::phi_minus().density();
    assert_abs_diff_eq!(fidelity_trace(&pure, &pure).unwrap(), 1.0, epsilon = 1e-12);

    let f01 = fidelity_trace(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap();
    assert_eq!(f01, 0.0);

    assert!(fidelity_trace(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(4, 0)).is_err());
}

#[test]
fn raw_mode_keeps_the_trace_check() {
    let m = rho_pert().into_matrix();
    assert!(DensityMatrix::new(m.clone()).is_err());
    assert!(DensityMatrix::raw(m.clone()).is_ok());
    let mut bad_trace = m;
    bad_trace[(0, 0)] = c64(0.2, 0.0);
    assert!(DensityMatrix::raw(bad_trace).is_err());
}

#[test]
fn validation_rejects_bad_states() {
    let neg = from_real_rows(2, &[1.2, 0.0, 0.0, -0.2]).unwrap();
    assert!(matches!(DensityMatrix::new(neg), Err(QfcError::InvalidState(_))));
    let tr = from_real_rows(2, &[0.6, 0.0, 0.0, 0.6]).unwrap();
    assert!(DensityMatrix::new(tr).is_err());
    let rect = ComplexMatrix::zeros(2, 3);
    assert!(matches!(DensityMatrix::new(rect), Err(QfcError::DimensionMismatch(_))));
    assert!(PureState::new(vec![c64(1.0, 0.0), c64(1.0, 0.0)]).is_err());
}

#[test]
fn purity_and_entropy_examples() {
    let mixed = DensityMatrix::maximally_mixed(2);
    assert_abs_diff_eq!(purity(&mixed), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(von_neumann_entropy(&mixed), std::f64::consts::LN_2, epsilon = 1e-14);
    assert_abs_diff_eq!(von_neumann_entropy(&bell::psi_minus().density()), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(purity(&bell::psi_minus().density()), 1.0, epsilon = 1e-14);
}

#[test]
fn bloch_examples() {
    let cases = [
        (DensityMatrix::maximally_mixed(2), [0.0, 0.0, 0.0]),
        (DensityMatrix::basis(2, 0), [0.0, 0.0, 1.0]),
        (
            PureState::normalized(vec![c64(1.0, 0.0), c64(1.0, 0.0)])
                .unwrap()
                .density(),
            [1.0, 0.0, 0.0],
        ),
    ];
    for (rho, want) in cases {
        let v = bloch_from_density(&rho).unwrap();
        for (a, b) in v.as_array().iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let back = density_from_bloch(&v).unwrap();
        assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
    }
    assert!(density_from_bloch(&BlochVector::unchecked(1.0, 0.1, 0.0)).is_err());
    assert!(bloch_from_density(&DensityMatrix::maximally_mixed(4)).is_err());
}

#[test]
fn r_squared_examples() {
    assert_abs_diff_eq!(r_squared(&bell::phi_plus().density()).unwrap(), 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r_squared(&DensityMatrix::maximally_mixed(4)).unwrap(), 0.0, epsilon = 1e-15);

    let a = BlochVector::new(0.6, 0.0, 0.8).unwrap();
    let b = BlochVector::new(0.0, -1.0, 0.0).unwrap();
    let prod = tensor_product(
        density_from_bloch(&a).unwrap().matrix(),
        density_from_bloch(&b).unwrap().matrix(),
    );
    let r2 = r_squared(&DensityMatrix::new(prod).unwrap()).unwrap();
    assert_abs_diff_eq!(r2, a.norm_sq() * b.norm_sq(), epsilon = 1e-12);
    assert!(r2 <= 1.0 + 1e-12);
}

#[test]
fn fano_coefficients_of_bell_states() {
    let f = fano_decompose(&bell::psi_plus().density()).unwrap();
    assert_abs_diff_eq!(f.get(Pauli::X, Pauli::X), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(f.get(Pauli::Y, Pauli::Y), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(f.get(Pauli::Z, Pauli::Z), -1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(f.get(Pauli::I, Pauli::I), 1.0, epsilon = 1e-15);
    assert!(FanoCoefficients::new(f.r).is_ok());
    let mut bad = f.r;
    bad[0][0] = 0.5;
    assert!(FanoCoefficients::new(bad).is_err());
}

#[test]
fn angular_momentum_examples() {
    let (fx, fy, fz) = angular_momentum_ops(1).unwrap();
    assert!(max_abs(&(fx - sigma_x().scale(0.5))) < 1e-15);
    assert!(max_abs(&(fy - sigma_y().scale(0.5))) < 1e-15);
    assert!(max_abs(&(fz - sigma_z().scale(0.5))) < 1e-15);

    let (_, _, fz1) = angular_momentum_ops(2).unwrap();
    let d: Vec<f64> = (0..3).map(|i| fz1[(i, i)].re).collect();
    assert_eq!(d, vec![1.0, 0.0, -1.0]);

    for two_j in 1..=10u32 {
        let (fx, fy, fz) = angular_momentum_ops(two_j).unwrap();
        let comm = &fx * &fy - &fy * &fx;
        assert!(max_abs(&(comm - fz.clone() * c64(0.0, 1.0))) < 1e-12, "two_j = {two_j}");
        // Casimir j(j+1)
        let j = two_j as f64 / 2.0;
        let cas = &fx * &fx + &fy * &fy + &fz * &fz;
        let want = ComplexMatrix::identity(two_j as usize + 1, two_j as usize + 1).scale(j * (j + 1.0));
        assert!(max_abs(&(cas - want)) < 1e-12);
    }
    assert!(angular_momentum_ops(0).is_err());
}

#[test]
fn zz_operator_is_diagonal_in_computational_basis() {
    let zz = pauli2(Pauli::Z, Pauli::Z);
    let ev = hermitian_eigenvalues(&zz);
    assert_eq!(ev, vec![-1.0, -1.0, 1.0, 1.0]);
}

fn ginibre(d: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * d * d)
        .prop_filter_map("degenerate", move |p| DensityMatrix::from_ginibre(d, &p).ok())
}

fn hermitian(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-2.0f64..2.0, 2 * d * d).prop_map(move |p| {
        let g = ComplexMatrix::from_fn(d, d, |i, j| c64(p[i * d + j], p[d * d + i * d + j]));
        (&g + g.adjoint()).scale(0.5)
    })
}

proptest! {
    #[test]
    fn bloch_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let v = BlochVector::unchecked(x, y, z);
        prop_assume!(v.norm_sq() <= 1.0);
        let back = bloch_from_density(&density_from_bloch(&v).unwrap()).unwrap();
        prop_assert!((back.x - x).abs() < 1e-12 && (back.y - y).abs() < 1e-12 && (back.z - z).abs() < 1e-12);
    }

    #[test]
    fn fano_round_trip(rho in ginibre(4)) {
        let f = fano_decompose(&rho).unwrap();
        prop_assert!(FanoCoefficients::new(f.r).is_ok());
        let back = f.to_density();
        prop_assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
    }

    #[test]
    fn fidelity_symmetric_and_bilinear(a in ginibre(3), b in ginibre(3), c in ginibre(3), w in 0.0f64..1.0) {
        let fab = fidelity_trace(&a, &b).unwrap();
        prop_assert!((fab - fidelity_trace(&b, &a).unwrap()).abs() < 1e-14);
        let mix = DensityMatrix::new(a.matrix().scale(w) + b.matrix().scale(1.0 - w)).unwrap();
        let lhs = fidelity_trace(&mix, &c).unwrap();
        let rhs = w * fidelity_trace(&a, &c).unwrap() + (1.0 - w) * fidelity_trace(&b, &c).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn entropy_unitary_invariant(rho in ginibre(3), h in hermitian(3), t in 0.0f64..3.0) {
        let u = unitary_from_hamiltonian(&h, t);
        prop_assert!(is_unitary(&u, 1e-12));
        let rotated = rho.conjugate_by(&u).unwrap();
        prop_assert!((von_neumann_entropy(&rotated) - von_neumann_entropy(&rho)).abs() < 1e-10);
        prop_assert!((purity(&rotated) - purity(&rho)).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_one(rho in ginibre(4)) {
        let s: f64 = rho.eigenvalues().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn r_squared_local_unitary_invariant(rho in ginibre(4), h1 in hermitian(2), h2 in hermitian(2)) {
        let u = tensor_product(&unitary_from_hamiltonian(&h1, 1.0), &unitary_from_hamiltonian(&h2, 1.0));
        let r0 = r_squared(&rho).unwrap();
        let r1 = r_squared(&rho.conjugate_by(&u).unwrap()).unwrap();
        prop_assert!((r0 - r1).abs() < 1e-10);
        prop_assert!(r0 <= 3.0 + 1e-9);
    }

    #[test]
    fn partial_trace_preserves_trace(rho in ginibre(4), keep in 0usize..2) {
        let red = partial_trace(&rho, &[2, 2], keep).unwrap();
        prop_assert!((red.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(red.validate().is_ok());
    }
}
