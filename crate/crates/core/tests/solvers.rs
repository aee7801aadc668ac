mod common;

use coarse_grain::bath::{Bath, BathSpec};
use coarse_grain::liouvillians::{bm_generator, bms_generator, cg_generator};
use coarse_grain::qmatrix::{expm, matmul, max_abs_diff, CMatrix, Propagator, C64, I};
use coarse_grain::solvers::{evolve_constant, exact_dephasing, uniform_grid, BornAxis, DensityMatrix, Method};
use coarse_grain::spinsys::{build_hamiltonian, coupling_operators, Axis, CouplingOperators, SpinSpec};
use common::*;
use proptest::prelude::*;

#[test]
fn bms_thermalizes_the_diagonal_coupling_qubit() {
    let bath = Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, 1.0, 0.1)).unwrap();
    let (h, c) = qubit_with(diagonal_coupling());
    let l = bms_generator(&h, &c, &bath).unwrap();
    let rho0 = DensityMatrix::uniform_pure(2);
    let grid = uniform_grid(200.0, 201).unwrap();
    let gibbs = DensityMatrix::gibbs(&h, 1.0).unwrap();
    let rk4 = evolve_constant(&l, &rho0, &grid, Method::Rk4).unwrap();
    let ex = evolve_constant(&l, &rho0, &grid, Method::Expm).unwrap();
    assert!(max_abs_diff(rk4.last().unwrap(), gibbs.matrix()) < 1e-6);
    for (a, b) in rk4.states.iter().zip(&ex.states) {
        assert!(max_abs_diff(a, b) < 1e-7);
    }
    assert!(rk4.max_trace_error() < 1e-9 && rk4.max_hermiticity_error() < 1e-9);
}

#[test]
fn expm_propagators_form_a_semigroup() {
    let bath = Bath::new(BathSpec::drude(1.0, 1.0, 0.2)).unwrap();
    let (h, c) = random_two_qubit(2);
    let l = bms_generator(&h, &c, &bath).unwrap();
    let p1 = Propagator::new(&l, 0.7).unwrap();
    let p2 = Propagator::new(&l, 1.3).unwrap();
    let p3 = Propagator::new(&l, 2.0).unwrap();
    let composed = matmul(p1.matrix(), p2.matrix());
    assert!(max_abs_diff(&composed, p3.matrix()) < 1e-12);
}

#[test]
fn bm_loses_positivity_above_critical_coupling() {
    let bath = Bath::new(BathSpec::ohmic(2.0, 1.0, 5.0, 1.0, 0.3)).unwrap();
    let (h, c) = qubit_with(real([1.0, 0.0, 0.0]));
    let l = bm_generator(&h, &c, &bath).unwrap();
    let grid = uniform_grid(100.0, 1001).unwrap();
    let traj = evolve_constant(&l, &DensityMatrix::uniform_pure(2), &grid, Method::Expm).unwrap();
    assert!(traj.min_eigenvalue() < -0.01, "{}", traj.min_eigenvalue());
    assert!(traj.max_eigenvalue() > 1.5, "{}", traj.max_eigenvalue());
}

#[test]
fn fixed_tau_cg_touches_the_exact_dephasing_curve() {
    let bath = Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, 1.0, 0.1)).unwrap();
    let (h, c) = qubit_with(real([0.0, 0.0, 1.0]));
    let rho0 = DensityMatrix::uniform_pure(2);
    for &tau in &[2.0, 5.0] {
        let l = cg_generator(&h, &c, &bath, tau).unwrap();
        let traj = evolve_constant(&l, &rho0, &[0.0, tau], Method::Expm).unwrap();
        let exact = 0.5 * (-exact_dephasing(&bath, tau).unwrap()).exp();
        let got = traj.last().unwrap()[(0, 1)].norm();
        assert!((got - exact).abs() < 1e-8, "tau {tau}: {got} vs {exact}");
    }
}

#[test]
fn born_x_axis_relaxes_to_the_maximally_mixed_populations() {
    let grid = uniform_grid(2500.0, 51).unwrap();
    let traj = coarse_grain::solvers::born_exponential_solver(
        BornAxis::X,
        1.0,
        0.1,
        &DensityMatrix::computational(0, 2).unwrap(),
        &grid,
    )
    .unwrap();
    assert!((traj.last().unwrap()[(0, 0)].re - 0.5).abs() < 1e-6);
}

fn degenerate_pair() -> (CMatrix, CouplingOperators) {
    let mut spec = SpinSpec::new(2);
    spec.gamma0 = 1.0;
    spec.set_linear(0, Axis::Z, -0.5).set_linear(1, Axis::Z, -0.5);
    let spec = spec.with_uniform_coupling(diagonal_coupling());
    (build_hamiltonian(&spec), coupling_operators(&spec))
}

#[test]
fn generators_are_covariant_under_unitary_frames() {
    // A degenerate spectrum leaves the eigenvector gauge free; the generator must not depend on it.
    let bath = Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, 10.0, 0.1)).unwrap();
    let (h, c) = degenerate_pair();
    let u = expm(&(random_hermitian(4, 99) * I)).unwrap();
    let conj = |m: &CMatrix| matmul(&matmul(&u, m), &u.adjoint());
    let (h2, c2) = (conj(&h), CouplingOperators { sigma_r: conj(&c.sigma_r), sigma_i: conj(&c.sigma_i) });
    for (name, a, b) in [
        ("bm", bm_generator(&h, &c, &bath).unwrap(), bm_generator(&h2, &c2, &bath).unwrap()),
        ("bms", bms_generator(&h, &c, &bath).unwrap(), bms_generator(&h2, &c2, &bath).unwrap()),
        ("cg", cg_generator(&h, &c, &bath, 3.0).unwrap(), cg_generator(&h2, &c2, &bath, 3.0).unwrap()),
    ] {
        let d = a.change_basis(&u).max_abs_diff(&b);
        assert!(d < 1e-10, "{name}: {d}");
    }
}

#[test]
fn generator_builds_are_deterministic() {
    let bath = Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, 10.0, 0.1)).unwrap();
    let (h, c) = degenerate_pair();
    let a = bms_generator(&h, &c, &bath).unwrap();
    let b = bms_generator(&h, &c, &bath).unwrap();
    assert_eq!(a.matrix(), b.matrix());
}

#[test]
fn unitary_evolution_keeps_the_spectrum() {
    let (h, _) = random_two_qubit(4);
    let l = coarse_grain::qmatrix::Superoperator::hamiltonian(&h);
    let rho0 = DensityMatrix::gibbs(&random_hermitian(4, 5), 1.0).unwrap();
    let grid = uniform_grid(10.0, 21).unwrap();
    for method in [Method::Rk4, Method::Expm] {
        let traj = evolve_constant(&l, &rho0, &grid, method).unwrap();
        let first = &traj.diagnostics[0].eigenvalues;
        for d in &traj.diagnostics {
            for (x, y) in d.eigenvalues.iter().zip(first) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_two_qubit_trajectories_stay_physical(seed in 0u64..10_000, tau in 0.5f64..10.0) {
        let bath = Bath::new(BathSpec::drude(1.0, 1.0, 0.2)).unwrap();
        let (h, c) = random_two_qubit(seed);
        let rho0 = DensityMatrix::uniform_pure(4);
        let grid = uniform_grid(30.0, 31).unwrap();
        for l in [bms_generator(&h, &c, &bath).unwrap(), cg_generator(&h, &c, &bath, tau).unwrap()] {
            let traj = evolve_constant(&l, &rho0, &grid, Method::Expm).unwrap();
            prop_assert!(traj.min_eigenvalue() >= -1e-7);
            prop_assert!(traj.max_trace_error() <= 1e-9);
            prop_assert!(traj.max_hermiticity_error() <= 1e-9);
        }
    }
}

#[test]
fn density_matrix_validation() {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::from(1.2);
    m[(1, 1)] = C64::from(-0.2);
    assert!(DensityMatrix::new(m).is_err());
    let gs = DensityMatrix::ground(&build_hamiltonian(&qubit_spec())).unwrap();
    assert_eq!(gs.matrix()[(0, 0)], C64::from(1.0));
}
