use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

use proptest::prelude::*;
use qfc_chaos::*;
use qfc_qstate::matrix::{c64, hermitian_eigenvalues, hermiticity_defect, max_abs, ComplexMatrix};
use qfc_qstate::state::bell;
use qfc_qstate::{fidelity_trace, DensityMatrix, PureState, C64};

fn ginibre(d: usize, seed: u64) -> DensityMatrix {
    // fixed pseudo-random parameters without pulling an RNG into the test
    let params: Vec<f64> = (0..2 * d * d)
        .map(|i| ((seed as f64 + 1.0) * 12.9898 + i as f64 * 78.233).sin() * 43758.5453 % 1.0)
        .collect();
    DensityMatrix::from_ginibre(d, &params).unwrap()
}

#[test]
fn squaring_examples() {
    let (out, s) = square_elements(&DensityMatrix::basis(2, 0), false).unwrap();
    assert_eq!(s, 1.0);
    assert!(max_abs(&(out.matrix() - DensityMatrix::basis(2, 0).matrix())) < 1e-15);

    let psi = bell::psi_plus().density();
    let (out, s) = square_elements(&psi, false).unwrap();
    assert!((s - 0.5).abs() < 1e-15);
    assert!(max_abs(&(out.matrix() - psi.matrix())) < 1e-15);

    let (out, s) = square_elements(&DensityMatrix::maximally_mixed(2), false).unwrap();
    assert!((s - 0.5).abs() < 1e-15);
    assert!(max_abs(&(out.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);
}

#[test]
fn squaring_rejects_degenerate_and_unflagged_raw() {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = c64(1e-8, 0.0);
    m[(1, 1)] = c64(1e-8, 0.0);
    assert!(square_elements(&DensityMatrix::from_matrix_unchecked(m), false).is_err());
    assert!(square_elements(&perturbed_bell_fixture(), false).is_err());
    assert!(square_elements(&perturbed_bell_fixture(), true).is_ok());
}

#[test]
fn xor_realization_equals_squaring_on_random_qubits() {
    for seed in 0..100 {
        let rho = ginibre(2, seed);
        let (a, pa) = square_elements(&rho, false).unwrap();
        let (b, pb) = xor_postselect(&rho).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
        assert!((pa - pb).abs() < 1e-12);
    }
}

#[test]
fn xor_realization_on_two_qubits_and_qutrits() {
    for seed in 0..10 {
        assert!(realization_gap(&ginibre(4, seed)).unwrap() < 1e-12);
        assert!(realization_gap(&ginibre(3, seed)).unwrap() < 1e-12);
    }
}

#[test]
fn xor_realization_examples() {
    let plus = PureState::normalized(vec![c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap().density();
    let (out, s) = xor_postselect(&plus).unwrap();
    assert!((s - 0.5).abs() < 1e-15);
    assert!(max_abs(&(out.matrix() - plus.matrix())) < 1e-15);
    for i in 0..2 {
        let (out, s) = xor_postselect(&DensityMatrix::basis(2, i)).unwrap();
        assert_eq!(s, 1.0);
        assert!(max_abs(&(out.matrix() - DensityMatrix::basis(2, i).matrix())) < 1e-15);
    }
}

#[test]
fn xor_gate_is_a_permutation() {
    for d in [2, 3, 4] {
        let u = xor_gate(d);
        let n = d * d;
        assert!(max_abs(&(&u * u.adjoint() - ComplexMatrix::identity(n, n))) < 1e-15);
    }
}

#[test]
fn schur_product_keeps_states_physical() {
    for seed in 0..1000 {
        let d = 2 + (seed % 3) as usize;
        let rho = ginibre(d, seed);
        let (out, _) = square_elements(&rho, false).unwrap();
        assert!(hermiticity_defect(out.matrix()) < 1e-14);
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        let min = hermitian_eigenvalues(out.matrix())[0];
        assert!(min > -1e-12, "seed {seed}: λ_min = {min}");
    }
}

#[test]
fn f_step_swaps_psi_plus_and_phi_plus() {
    let psi = bell::psi_plus().density();
    let phi = bell::phi_plus().density();
    let one = f_step(&psi, FRAC_PI_4, FRAC_PI_2).unwrap();
    assert!((fidelity_trace(&one, &phi).unwrap() - 1.0).abs() < 1e-12);
    let two = f_step(&one, FRAC_PI_4, FRAC_PI_2).unwrap();
    assert!((fidelity_trace(&two, &psi).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn f_step_at_zero_angle_is_squaring() {
    let rho = ginibre(2, 3);
    let a = f_step(&rho, 0.0, 1.3).unwrap();
    let (b, _) = square_elements(&rho, false).unwrap();
    assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-15);
    assert!(f_step(&ginibre(3, 1), 0.3, 0.2).is_err());
}

#[test]
fn quarter_turn_gives_p_equal_i() {
    let p = MapParams::from_angles(FRAC_PI_4, FRAC_PI_2).p;
    assert!((p - c64(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn perturbed_bell_iteration() {
    let it = bell_purify_iterate(&perturbed_bell_fixture(), 30, FRAC_PI_4, FRAC_PI_2).unwrap();
    assert!((it.fidelities[0] - 0.5075).abs() < 1e-12);
    // even steps approach Ψ⁺, odd steps Φ⁺
    for k in (24..=30).step_by(2) {
        assert!(it.fidelities[k] > 0.999, "F_{k} = {}", it.fidelities[k]);
        assert!(it.fidelities[k - 1] < 0.01);
    }
    for k in (2..=28).step_by(2) {
        assert!(it.fidelities[k + 2] >= it.fidelities[k] - 1e-12, "F_{} < F_{k}", k + 2);
    }
}

#[test]
fn pure_maps() {
    let z = RiemannPoint::finite(0.3, -0.7);
    let w = fp_map(z, c64(0.0, 0.0));
    assert_eq!(w, RiemannPoint::Finite(c64(0.3, -0.7) * c64(0.3, -0.7)));
    assert!((fp_derivative_abs(z, c64(0.0, 0.0)) - 2.0 * c64(0.3, -0.7).norm()).abs() < 1e-15);
    assert_eq!(fp_map(RiemannPoint::Infinity, c64(0.0, 0.0)), RiemannPoint::Infinity);
    match fp_map(RiemannPoint::Infinity, c64(1.0, 1.0)) {
        RiemannPoint::Finite(v) => assert!((v + 1.0 / c64(1.0, -1.0)).norm() < 1e-15),
        _ => panic!("∞ must map to −1/p*"),
    }
    // pole of F_1 at z = ±1
    assert_eq!(fp_map(RiemannPoint::finite(1.0, 0.0), c64(1.0, 0.0)), RiemannPoint::Infinity);
    assert_eq!(spherical_derivative(RiemannPoint::Infinity, c64(1.0, 0.0)), 0.0);
    assert!((spherical_derivative(RiemannPoint::finite(0.0, 1.0), c64(0.0, 0.0)) - 2.0).abs() < 1e-15);
}

#[test]
fn homogeneous_map_agrees_with_rational_map() {
    let p = c64(0.4, -0.9);
    for k in 0..40 {
        let z = RiemannPoint::Finite(C64::from_polar(0.1 + 0.07 * k as f64, 0.37 * k as f64));
        let a = z.to_homogeneous().map(p);
        let b = fp_map(z, p).to_homogeneous();
        assert!(a.chordal(b) < 1e-13);
    }
    assert!(Homogeneous::INFINITY.map(p).chordal(fp_map(RiemannPoint::Infinity, p).to_homogeneous()) < 1e-15);
}

#[test]
fn preimages_map_back() {
    let p = c64(1.0, 0.0);
    for k in 0..20 {
        let w = RiemannPoint::Finite(C64::from_polar(0.5 + 0.2 * k as f64, 1.1 * k as f64)).to_homogeneous();
        for z in w.preimages(p) {
            assert!(z.map(p).chordal(w) < 1e-13);
        }
    }
}

#[test]
fn spherical_derivative_matches_finite_difference() {
    let p = c64(0.7, 0.2);
    for k in 0..20 {
        let z = RiemannPoint::Finite(C64::from_polar(0.2 + 0.15 * k as f64, 0.9 * k as f64)).to_homogeneous();
        let w = z.offset(Homogeneous::new(c64(0.3, 0.1), c64(1.0, 0.0)), 1e-7);
        let ratio = z.map(p).chordal(w.map(p)) / z.chordal(w);
        assert!((ratio - z.spherical_derivative(p)).abs() < 1e-5 * (1.0 + ratio));
    }
}

#[test]
fn chordal_distance_examples() {
    let zero = RiemannPoint::finite(0.0, 0.0);
    assert!((chordal_distance(zero, RiemannPoint::Infinity) - 2.0).abs() < 1e-15);
    assert!((chordal_distance(RiemannPoint::finite(1.0, 0.0), RiemannPoint::finite(-1.0, 0.0)) - 2.0).abs() < 1e-15);
    assert!((chordal_distance(zero, RiemannPoint::finite(1.0, 0.0)) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn unit_circle_is_the_trivial_julia_set() {
    let job = RasterJob::square(2.0, 513, 100, c64(0.0, 0.0));
    let grid = julia_raster(&job).unwrap();
    for r in 0..513 {
        for c in 0..513 {
            let (i, j) = (c as i64 - 256, 256 - r as i64);
            let on_circle = i * i + j * j == 128 * 128;
            assert_eq!(grid.get(r, c) == NON_CONVERGENT, on_circle, "pixel ({i}, {j})");
        }
    }
    assert_eq!(grid.non_convergent(), 4);
    // the centre is already the superattracting fixed point
    assert_eq!(grid.get(256, 256), 0);
}

fn fig5_job() -> RasterJob {
    RasterJob::square(2.0, 512, 60, c64(1.0, 0.0))
}

#[test]
fn p_one_raster_has_fractal_boundary() {
    let grid = julia_raster(&fig5_job()).unwrap();
    assert!(grid.non_convergent() > 0);
    let mask = boundary_mask(&grid);
    let dim = box_counting_dimension(&mask, 512, 512, &dyadic_sizes(64)).unwrap();
    assert!(dim > 1.0, "dimension {dim}");
    assert!(dim <= 2.0 + 1e-9);
}

#[test]
fn smooth_curves_have_box_dimension_one() {
    let n = 512;
    let mask: Vec<bool> = (0..n * n)
        .map(|k| {
            let (r, c) = ((k / n) as f64 - 255.5, (k % n) as f64 - 255.5);
            ((r * r + c * c).sqrt() - 200.0).abs() < 0.71
        })
        .collect();
    let dim = box_counting_dimension(&mask, n, n, &dyadic_sizes(64)).unwrap();
    assert!((dim - 1.0).abs() < 0.1, "{dim}");
}

#[test]
fn doubling_iterations_never_loses_convergence() {
    let mut job = RasterJob::square(2.0, 128, 40, c64(1.0, 0.0));
    let short = julia_raster(&job).unwrap();
    job.max_iters = 80;
    let long = julia_raster(&job).unwrap();
    for (a, b) in short.counts.iter().zip(&long.counts) {
        if *a != NON_CONVERGENT {
            assert_ne!(*b, NON_CONVERGENT);
        }
    }
    assert!(long.non_convergent() <= short.non_convergent());
}

#[test]
fn raster_is_deterministic_across_pools() {
    let job = RasterJob::square(1.5, 96, 50, c64(0.3, 0.8));
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| julia_raster(&job).unwrap());
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| julia_raster(&job).unwrap());
    assert_eq!(one, many);
    let mut a = Vec::new();
    let mut b = Vec::new();
    one.write_pgm(&mut a).unwrap();
    many.write_pgm(&mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn raster_counts_are_in_range() {
    let job = fig5_job();
    let grid = julia_raster(&RasterJob { width: 64, height: 64, ..job }).unwrap();
    for &c in &grid.counts {
        assert!(c == NON_CONVERGENT || (0..=job.max_iters as i32).contains(&c));
    }
}

#[test]
fn pgm_layout() {
    let grid = RasterGrid {
        width: 3,
        height: 2,
        max_iters: 10,
        counts: vec![-1, 0, 10, 5, 1, -1],
    };
    let mut out = Vec::new();
    grid.write_pgm(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "P2\n3 2\n255\n0 1 255\n128 26 0\n");
    let mut wide = Vec::new();
    RasterGrid { width: 40, height: 1, max_iters: 1, counts: vec![1; 40] }.write_pgm(&mut wide).unwrap();
    assert!(String::from_utf8(wide).unwrap().lines().all(|l| l.len() <= 70));
}

#[test]
fn raster_job_validation() {
    let mut job = fig5_job();
    job.max_iters = 0;
    assert!(julia_raster(&job).is_err());
    let mut job = fig5_job();
    job.cycle_tol = 0.0;
    assert!(job.validate().is_err());
    let mut job = fig5_job();
    job.re_max = job.re_min;
    assert!(job.validate().is_err());
}

#[test]
fn attracting_fixed_point_has_very_negative_exponent() {
    let est = lyapunov_estimate(RiemannPoint::finite(0.5, 0.0), c64(0.0, 0.0), 10_000).unwrap();
    assert!(est.chain_rule <= -5.0);
    assert!(est.saturated);
}

#[test]
fn unit_circle_exponent_is_ln_two() {
    let z0 = RiemannPoint::Finite(C64::from_polar(1.0, 2f64.sqrt()));
    let est = julia_lyapunov_estimate(z0, c64(0.0, 0.0), 10_000, 1).unwrap();
    assert!((est.chain_rule - LN_2).abs() < 0.01, "{}", est.chain_rule);
    assert!((est.shadow - LN_2).abs() < 0.01, "{}", est.shadow);
}

#[test]
fn backward_orbit_is_an_orbit() {
    let p = c64(1.0, 0.0);
    let orbit = backward_orbit(RiemannPoint::finite(0.2, 0.4), p, 500, 7);
    for w in orbit.windows(2) {
        assert!(w[0].map(p).chordal(w[1]) < 1e-10);
    }
}

#[test]
fn estimators_agree_near_p_one_julia_set() {
    let p = c64(1.0, 0.0);
    for s in 0..20u64 {
        let z0 = RiemannPoint::Finite(C64::from_polar(0.5 + 0.05 * s as f64, 0.7 * s as f64));
        let est = julia_lyapunov_estimate(z0, p, 2000, s).unwrap();
        assert!((est.chain_rule - est.shadow).abs() < 0.05, "{est:?}");
        assert!(est.chain_rule > 0.0 && est.chain_rule.is_finite());
    }
}

fn unit_qubit() -> impl Strategy<Value = PureState> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|(a, b, c, d)| PureState::normalized(vec![c64(a, b), c64(c, d)]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn density_step_matches_riemann_map(psi in unit_qubit(), x in 0.0..1.4f64, phi in -3.2..3.2f64) {
        let rho = psi.density();
        let next = f_step(&rho, x, phi).unwrap();
        let z = RiemannPoint::from_pure_qubit(&psi).unwrap();
        let p = MapParams::from_angles(x, phi).p;
        let want = fp_map(z, p).density();
        prop_assert!(fidelity_trace(&next, &want).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn su2_is_unitary(x in -3.2..3.2f64, phi in -3.2..3.2f64) {
        let u = su2(x, phi);
        prop_assert!(max_abs(&(&u * u.adjoint() - ComplexMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn real_parameter_rasters_are_conjugation_symmetric(re in -2.0..2.0f64, im in -2.0..2.0f64) {
        // F_p(z*) = F_p(z)* for real p
        let p = c64(1.0, 0.0);
        let a = classify(RiemannPoint::finite(re, im), p, 60, 1e-9);
        let b = classify(RiemannPoint::finite(re, -im), p, 60, 1e-9);
        prop_assert_eq!(a, b);
    }
}
