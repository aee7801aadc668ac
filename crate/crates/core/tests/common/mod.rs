#![allow(dead_code)]

use coarse_grain::qmatrix::{CMatrix, C64};
use coarse_grain::spinsys::{build_hamiltonian, coupling_operators, Axis, CouplingOperators, SpinSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// H = (1 - sigma_z)/2.
pub fn qubit_spec() -> SpinSpec {
    let mut spec = SpinSpec::new(1);
    spec.gamma0 = 0.5;
    spec.set_linear(0, Axis::Z, -0.5);
    spec
}

pub fn qubit_with(n: [C64; 3]) -> (CMatrix, CouplingOperators) {
    let spec = qubit_spec().with_uniform_coupling(n);
    (build_hamiltonian(&spec), coupling_operators(&spec))
}

pub fn real(v: [f64; 3]) -> [C64; 3] {
    [C64::from(v[0]), C64::from(v[1]), C64::from(v[2])]
}

/// The (1+i)/sqrt(2) (1, 1, 1) coupling vector.
pub fn diagonal_coupling() -> [C64; 3] {
    let r = 1.0 / 2f64.sqrt();
    [C64::new(r, r); 3]
}

/// Random two-spin Hamiltonian with a real coupling on each spin.
pub fn random_two_qubit(seed: u64) -> (CMatrix, CouplingOperators) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = SpinSpec::new(2);
    for i in 0..2 {
        for axis in Axis::ALL {
            spec.set_linear(i, axis, rng.gen_range(-1.0..1.0));
        }
        let n = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        spec.set_coupling(i, real(n));
    }
    spec.set_quadratic(0, 1, Axis::Z, Axis::Z, rng.gen_range(-1.0..1.0));
    spec.set_quadratic(0, 1, Axis::X, Axis::Y, rng.gen_range(-0.5..0.5));
    (build_hamiltonian(&spec), coupling_operators(&spec))
}

pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::from(0.5)
}
