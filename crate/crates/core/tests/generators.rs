mod common;

use coarse_grain::bath::{Bath, BathSpec};
use coarse_grain::liouvillians::{
    bm_generator, bms_dampening_matrix, bms_generator, cg_dampening_matrix, cg_generator, eigenoperator_decomposition,
};
use coarse_grain::qmatrix::{
    commutator, eigh, hermitian_eigenvalues, max_abs_diff, CMatrix, Superoperator, C64, I, ONE,
};
use coarse_grain::solvers::DensityMatrix;
use coarse_grain::spinsys::{pauli, Axis, CouplingOperators};
use common::*;
use proptest::prelude::*;

fn ket_bra(i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(i, j)] = ONE;
    m
}

fn ohmic() -> Bath {
    Bath::new(BathSpec::ohmic(1.0, 1.0, 20.0, 1.0, 0.1)).unwrap()
}

fn generator_invariants(l: &Superoperator) {
    assert!(l.trace_defect() < 1e-10, "trace defect {}", l.trace_defect());
    assert!(l.hermiticity_defect() < 1e-10, "hermiticity defect {}", l.hermiticity_defect());
}

#[test]
fn drude_bms_matches_explicit_qubit_form() {
    // gamma(+-1) = 1/(1 + tau^2) for both signs, Lamb shift -(lambda^2/2) S(1) sigma_z.
    let (tau_b, lam) = (1.0, 0.1);
    let bath = Bath::new(BathSpec::drude(tau_b, 1.0, lam)).unwrap();
    let (h, c) = qubit_with(real([1.0, 0.0, 0.0]));
    let l = bms_generator(&h, &c, &bath).unwrap();

    let g = 1.0 / (1.0 + tau_b * tau_b);
    let s = tau_b / (1.0 + tau_b * tau_b);
    let z = pauli(Axis::Z);
    let eye = CMatrix::identity(2, 2);
    let mut expect = Superoperator::zeros(2);
    let shift = I * (0.5 + 0.5 * lam * lam * s);
    expect.add_left(shift, &z);
    expect.add_right(-shift, &z);
    let r = C64::from(lam * lam * g);
    expect.add_sandwich(r, &ket_bra(0, 1), &ket_bra(1, 0));
    expect.add_sandwich(r, &ket_bra(1, 0), &ket_bra(0, 1));
    expect.add_left(-r, &eye);
    assert!(l.max_abs_diff(&expect) < 1e-12, "{}", l.max_abs_diff(&expect));
}

#[test]
fn white_noise_cg_matches_explicit_qubit_form() {
    let lam = 0.1;
    let bath = Bath::new(BathSpec::drude(0.0, 1.0, lam)).unwrap();
    let (h, c) = qubit_with(real([1.0, 0.0, 0.0]));
    for &tau in &[0.5, 3.0, 40.0] {
        let l = cg_generator(&h, &c, &bath, tau).unwrap();
        let z = pauli(Axis::Z);
        let eye = CMatrix::identity(2, 2);
        let mut expect = Superoperator::zeros(2);
        expect.add_left(0.5 * I, &z);
        expect.add_right(-0.5 * I, &z);
        let r = C64::from(lam * lam);
        expect.add_sandwich(r, &ket_bra(0, 1), &ket_bra(1, 0));
        expect.add_sandwich(r, &ket_bra(1, 0), &ket_bra(0, 1));
        expect.add_left(-r, &eye);
        let sinc = tau.sin() / tau;
        expect.add_sandwich(r * sinc * (-I * tau).exp(), &ket_bra(0, 1), &ket_bra(0, 1));
        expect.add_sandwich(r * sinc * (I * tau).exp(), &ket_bra(1, 0), &ket_bra(1, 0));
        assert!(l.max_abs_diff(&expect) < 1e-12, "tau {tau}: {}", l.max_abs_diff(&expect));
    }
}

#[test]
fn finite_memory_cg_keeps_qubit_block_structure() {
    // Populations and coherences never mix for a sigma_x coupling of a qubit.
    let bath = Bath::new(BathSpec::drude(1.0, 1.0, 0.1)).unwrap();
    let (h, c) = qubit_with(real([1.0, 0.0, 0.0]));
    let l = cg_generator(&h, &c, &bath, 3.0).unwrap();
    for (a, b, cc, d) in itertools_product() {
        if (a == b) != (cc == d) {
            assert!(l.get(a, b, cc, d).norm() < 1e-14, "({a}{b}),({cc}{d})");
        }
    }
    assert!(l.get(0, 1, 1, 0).norm() > 1e-4);
}

fn itertools_product() -> Vec<(usize, usize, usize, usize)> {
    let mut v = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    v.push((a, b, c, d));
                }
            }
        }
    }
    v
}

#[test]
fn bms_gibbs_is_stationary_for_random_two_qubit_systems() {
    let bath = ohmic();
    for seed in 0..4 {
        let (h, c) = random_two_qubit(seed);
        let l = bms_generator(&h, &c, &bath).unwrap();
        let rho = DensityMatrix::gibbs(&h, 1.0).unwrap();
        let out = l.apply(rho.matrix()).unwrap();
        assert!(coarse_grain::qmatrix::max_abs(&out) < 1e-12, "seed {seed}");
    }
}

#[test]
fn bms_decouples_populations_from_coherences() {
    let bath = ohmic();
    let (h, c) = random_two_qubit(7);
    let basis = eigh(&h).unwrap();
    let l = bms_generator(&h, &c, &bath).unwrap().change_basis(&basis.vectors.adjoint());
    let n = 4;
    for a in 0..n {
        for cc in 0..n {
            for d in 0..n {
                if cc != d {
                    assert!(l.get(a, a, cc, d).norm() < 1e-12);
                    assert!(l.get(cc, d, a, a).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn cg_dampening_is_psd_across_tau() {
    let bath = ohmic();
    let (h, c) = random_two_qubit(3);
    for &tau in &[0.01, 0.1, 1.0, 10.0, 100.0] {
        let d = cg_dampening_matrix(&h, &c, &bath, tau).unwrap();
        let min = hermitian_eigenvalues(&d).unwrap()[0];
        assert!(min >= -1e-10, "tau {tau}: {min}");
    }
}

#[test]
fn bms_dampening_is_psd() {
    let bath = ohmic();
    for seed in 10..14 {
        let (h, c) = random_two_qubit(seed);
        let d = bms_dampening_matrix(&h, &c, &bath).unwrap();
        let min = hermitian_eigenvalues(&d).unwrap()[0];
        assert!(min >= -1e-10, "seed {seed}: {min}");
    }
}

#[test]
fn ohmic_generators_preserve_trace_and_hermiticity() {
    let bath = ohmic();
    for seed in 20..23 {
        let (h, c) = random_two_qubit(seed);
        generator_invariants(&bm_generator(&h, &c, &bath).unwrap());
        generator_invariants(&bms_generator(&h, &c, &bath).unwrap());
    }
    let (h, c) = random_two_qubit(20);
    generator_invariants(&cg_generator(&h, &c, &bath, 2.5).unwrap());
}

#[test]
fn cg_at_zero_tau_is_unitary() {
    let (h, c) = random_two_qubit(5);
    let l = cg_generator(&h, &c, &ohmic(), 0.0).unwrap();
    assert!(l.max_abs_diff(&Superoperator::hamiltonian(&h)) < 1e-15);
}

fn drude_couplings(v: [f64; 3], w: [f64; 3]) -> CouplingOperators {
    let mut spec = coarse_grain::spinsys::SpinSpec::new(2);
    spec.set_coupling(0, real(v));
    spec.set_coupling(1, real(w));
    coarse_grain::spinsys::coupling_operators(&spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn drude_generators_preserve_trace_and_hermiticity(
        seed in 0u64..10_000,
        v in prop::array::uniform3(-1.0f64..1.0),
        w in prop::array::uniform3(-1.0f64..1.0),
        tau in 0.05f64..20.0,
        tau_b in 0.1f64..3.0,
    ) {
        let (h, _) = random_two_qubit(seed);
        let c = drude_couplings(v, w);
        let bath = Bath::new(BathSpec::drude(tau_b, 1.0, 0.2)).unwrap();
        for l in [bm_generator(&h, &c, &bath).unwrap(), bms_generator(&h, &c, &bath).unwrap(), cg_generator(&h, &c, &bath, tau).unwrap()] {
            prop_assert!(l.trace_defect() < 1e-10);
            prop_assert!(l.hermiticity_defect() < 1e-10);
        }
        let d = cg_dampening_matrix(&h, &c, &bath, tau).unwrap();
        prop_assert!(hermitian_eigenvalues(&d).unwrap()[0] >= -1e-10);
    }

    #[test]
    fn eigenoperators_reconstruct_and_shift_energy(seed in 0u64..10_000, op_seed in 0u64..10_000) {
        let (h, _) = random_two_qubit(seed);
        let a = random_hermitian(4, op_seed);
        let basis = eigh(&h).unwrap();
        let parts = eigenoperator_decomposition(&a, &basis).unwrap();
        let mut sum = CMatrix::zeros(4, 4);
        for (w, p) in &parts {
            sum += p;
            // [H, A(w)] = -w A(w)
            let lhs = commutator(&h, p);
            prop_assert!(max_abs_diff(&lhs, &(p * C64::from(-w))) < 1e-10);
        }
        prop_assert!(max_abs_diff(&sum, &a) < 1e-12);
        for pair in parts.windows(2) {
            prop_assert!(pair[0].0 < pair[1].0);
        }
    }
}
