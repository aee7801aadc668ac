use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::{add_dissipator_term, scale, Setup};
use crate::bath::Bath;
use crate::error::{Error, Result};
use crate::qmatrix::{hermitian_eigenvalues, matmul, max_abs, CMatrix, Superoperator, C64, I};
use crate::spinsys::CouplingOperators;

/// Systems up to this dimension get the dampening-matrix PSD check on every build.
const PSD_CHECK_DIM: usize = 4;

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("coarse-graining time must be finite and >= 0, got {tau}")))
    }
}

struct Integrals<'s, 'b> {
    setup: &'s Setup<'b>,
    tau: f64,
    cache: HashMap<(bool, usize, usize), CMatrix>,
}

impl<'s, 'b> Integrals<'s, 'b> {
    fn new(setup: &'s Setup<'b>, tau: f64) -> Self {
        Self { setup, tau, cache: HashMap::new() }
    }

    /// Channel-space sinc-pair integral at Bohr indices (p, q); symmetric in p, q.
    fn get(&mut self, sigma: bool, p: usize, q: usize) -> Result<&CMatrix> {
        let key = (sigma, p.min(q), p.max(q));
        if !self.cache.contains_key(&key) {
            let m = self.setup.sinc(sigma, key.1, key.2, self.tau)?;
            self.cache.insert(key, m);
        }
        Ok(&self.cache[&key])
    }

    fn phase(&self, p: usize, q: usize) -> C64 {
        let f = &self.setup.bohr.freqs;
        (I * ((f[q] - f[p]) * self.tau / 2.0)).exp()
    }
}

fn lamb_shift(setup: &Setup, ints: &mut Integrals, lam2: f64, tau: f64) -> Result<CMatrix> {
    let n = setup.dim();
    let m = setup.channels();
    let d = setup.bohr.len();
    let mut out = CMatrix::zeros(n, n);
    for p in 0..d {
        for q in 0..d {
            let mut prods: Vec<(usize, usize, CMatrix)> = Vec::new();
            for a in 0..m {
                for b in 0..m {
                    let (Some(xa), Some(xb)) = (setup.part(a, p), setup.part(b, q)) else { continue };
                    let prod = matmul(&xa.adjoint(), xb);
                    if max_abs(&prod) > 1e-14 * max_abs(xa) * max_abs(xb) {
                        prods.push((a, b, prod));
                    }
                }
            }
            if prods.is_empty() {
                continue;
            }
            let phase = ints.phase(p, q);
            let s = ints.get(true, p, q)?.clone();
            for (a, b, prod) in prods {
                out += prod * (s[(a, b)] * phase * (lam2 * tau / (4.0 * PI)) / I);
            }
        }
    }
    Ok((&out + out.adjoint()) * C64::from(0.5))
}

/// Lamb-shift Hamiltonian of the coarse-grained generator, computational basis.
pub fn cg_lamb_shift(h: &CMatrix, couplings: &CouplingOperators, bath: &Bath, tau: f64) -> Result<CMatrix> {
    check_tau(tau)?;
    let setup = Setup::new(h, couplings, bath)?;
    let lam2 = bath.lambda().powi(2);
    if tau == 0.0 || lam2 == 0.0 {
        return Ok(CMatrix::zeros(h.nrows(), h.nrows()));
    }
    let mut ints = Integrals::new(&setup, tau);
    lamb_shift(&setup, &mut ints, lam2, tau)
}

/// Coarse-grained Lindblad generator `L^tau`.
pub fn cg_generator(h: &CMatrix, couplings: &CouplingOperators, bath: &Bath, tau: f64) -> Result<Superoperator> {
    check_tau(tau)?;
    let setup = Setup::new(h, couplings, bath)?;
    let lam2 = bath.lambda().powi(2);
    let mut l = Superoperator::hamiltonian(h);
    if tau == 0.0 || lam2 == 0.0 {
        return Ok(l);
    }
    let n = setup.dim();
    let m = setup.channels();
    let d = setup.bohr.len();
    let mut ints = Integrals::new(&setup, tau);
    let mut diss = Superoperator::zeros(n);
    for p in 0..d {
        for q in 0..d {
            if !setup.active(p) || !setup.active(q) {
                continue;
            }
            let phase = ints.phase(p, q);
            let g = ints.get(false, p, q)?.clone();
            for a in 0..m {
                for b in 0..m {
                    let (Some(xa), Some(xb)) = (setup.part(a, p), setup.part(b, q)) else { continue };
                    add_dissipator_term(&mut diss, g[(a, b)] * phase * (tau / (2.0 * PI)), xb, xa);
                }
            }
        }
    }
    if n <= PSD_CHECK_DIM {
        let damp = dampening(&setup, &mut ints, 1.0, tau)?;
        let floor = -1e-9 * max_abs(&damp);
        let min = hermitian_eigenvalues(&damp)?[0];
        if min < floor {
            return Err(Error::InvalidState(format!("dampening matrix has eigenvalue {min:e} at tau = {tau}")));
        }
    }
    let hls = lamb_shift(&setup, &mut ints, 1.0, tau)?;
    l = l + scale(diss + Superoperator::hamiltonian(&hls), lam2);
    Ok(l)
}

fn dampening(setup: &Setup, ints: &mut Integrals, lam2: f64, tau: f64) -> Result<CMatrix> {
    let n = setup.dim();
    let m = setup.channels();
    let mut out = CMatrix::zeros(n * n, n * n);
    if tau == 0.0 || lam2 == 0.0 {
        return Ok(out);
    }
    for c in 0..n {
        for dd in 0..n {
            let q = setup.bohr.of(c, dd);
            if setup.ops_e.iter().all(|o| o[(c, dd)] == C64::default()) {
                continue;
            }
            for b in 0..n {
                for a in 0..n {
                    let p = setup.bohr.of(b, a);
                    if setup.ops_e.iter().all(|o| o[(b, a)] == C64::default()) {
                        continue;
                    }
                    let phase = ints.phase(p, q);
                    let g = ints.get(false, p, q)?;
                    let mut v = C64::default();
                    for ca in 0..m {
                        for cb in 0..m {
                            v += g[(ca, cb)] * setup.ops_e[ca][(b, a)].conj() * setup.ops_e[cb][(c, dd)];
                        }
                    }
                    out[(c * n + dd, b * n + a)] = v * phase * (lam2 * tau / (2.0 * PI));
                }
            }
        }
    }
    Ok(out)
}

/// Dampening matrix gamma_{(cd),(ba)}(tau) in the energy basis. Row c*N+d,
/// column b*N+a; positive semidefinite for a physical bath.
pub fn cg_dampening_matrix(h: &CMatrix, couplings: &CouplingOperators, bath: &Bath, tau: f64) -> Result<CMatrix> {
    check_tau(tau)?;
    let setup = Setup::new(h, couplings, bath)?;
    let mut ints = Integrals::new(&setup, tau);
    dampening(&setup, &mut ints, bath.lambda().powi(2), tau)
}

/// Coefficient tables of `L^tau` in the energy basis, as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct CgTables {
    pub tau: f64,
    pub energies: Vec<f64>,
    pub dampening: Vec<Vec<[f64; 2]>>,
    pub lamb_shift: Vec<Vec<[f64; 2]>>,
}

fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn cg_tables(h: &CMatrix, couplings: &CouplingOperators, bath: &Bath, tau: f64) -> Result<CgTables> {
    check_tau(tau)?;
    let setup = Setup::new(h, couplings, bath)?;
    let lam2 = bath.lambda().powi(2);
    let mut ints = Integrals::new(&setup, tau);
    let damp = dampening(&setup, &mut ints, lam2, tau)?;
    let n = setup.dim();
    let hls = if tau == 0.0 || lam2 == 0.0 {
        CMatrix::zeros(n, n)
    } else {
        setup.basis.to_energy(&lamb_shift(&setup, &mut ints, lam2, tau)?)
    };
    Ok(CgTables { tau, energies: setup.basis.energies.clone(), dampening: rows(&damp), lamb_shift: rows(&hls) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathSpec;
    use crate::liouvillians::bms_generator;
    use crate::qmatrix::CVector;
    use crate::spinsys::{pauli, Axis};

    fn setup_qubit() -> (CMatrix, CouplingOperators) {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::from(0.0), C64::from(1.0)]));
        let a = pauli(Axis::X) + pauli(Axis::Z) * C64::from(0.5);
        (h, CouplingOperators { sigma_r: a, sigma_i: CMatrix::zeros(2, 2) })
    }

    #[test]
    fn tau_zero_is_unitary() {
        let (h, c) = setup_qubit();
        let bath = Bath::new(BathSpec::drude(0.5, 1.0, 0.2)).unwrap();
        assert_eq!(cg_generator(&h, &c, &bath, 0.0).unwrap(), Superoperator::hamiltonian(&h));
        assert!(cg_generator(&h, &c, &bath, -1.0).is_err());
    }

    #[test]
    fn drude_generator_is_physical_and_tends_to_bms() {
        let (h, c) = setup_qubit();
        let bath = Bath::new(BathSpec::drude(0.5, 1.0, 0.2)).unwrap();
        let bms = bms_generator(&h, &c, &bath).unwrap();
        let mut last = f64::INFINITY;
        for &tau in &[2.0, 20.0, 200.0] {
            let l = cg_generator(&h, &c, &bath, tau).unwrap();
            assert!(l.trace_defect() < 1e-13);
            assert!(l.hermiticity_defect() < 1e-13);
            let damp = cg_dampening_matrix(&h, &c, &bath, tau).unwrap();
            let ev = hermitian_eigenvalues(&damp).unwrap();
            assert!(ev[0] > -1e-12, "tau = {tau}: {}", ev[0]);
            let dist = l.max_abs_diff(&bms);
            assert!(dist < last, "tau = {tau}: {dist} !< {last}");
            last = dist;
        }
        assert!(last < 2e-3, "{last}");
    }

    #[test]
    fn tables_serialize() {
        let (h, c) = setup_qubit();
        let bath = Bath::new(BathSpec::drude(0.5, 1.0, 0.2)).unwrap();
        let t = cg_tables(&h, &c, &bath, 5.0).unwrap();
        assert_eq!(t.dampening.len(), 4);
        assert_eq!(t.lamb_shift.len(), 2);
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"tau\":5.0"));
    }
}
