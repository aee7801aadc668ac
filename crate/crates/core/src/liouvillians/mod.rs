//! Generators over the energy eigenbasis: Born-Markov (BM), the secular
//! Lindblad limit (BMS) and the coarse-grained Lindblad generator `L^tau`.
//!
//! All builders return Schrodinger-picture superoperators in the
//! computational basis. Jump operators are split by Bohr frequency,
//! `A[nu] = sum_{E_x - E_y = nu} <x|A|y> |x><y|`, and every dissipator is a sum of
//! terms `c (X rho Y^dagger - {Y^dagger X, rho}/2)`.

mod cg;
mod stability;

use serde::Serialize;

pub use cg::{cg_dampening_matrix, cg_generator, cg_lamb_shift, cg_tables, CgTables};
pub use stability::{bm_stability, BmStability};

use crate::bath::{Bath, ChannelPair, Component};
use crate::error::{Error, Result};
use crate::qmatrix::{eigh, max_abs, CMatrix, EnergyBasis, Superoperator, C64, I};
use crate::spinsys::CouplingOperators;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GeneratorKind {
    Bm,
    Bms,
    Cg { tau: f64 },
}

impl GeneratorKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorKind::Cg { tau } if !(tau >= 0.0 && tau.is_finite()) => {
                Err(Error::InvalidSpec(format!("coarse-graining time must be finite and >= 0, got {tau}")))
            }
            _ => Ok(()),
        }
    }
}

pub fn build_generator(
    kind: GeneratorKind,
    h: &CMatrix,
    couplings: &CouplingOperators,
    bath: &Bath,
) -> Result<Superoperator> {
    kind.validate()?;
    match kind {
        GeneratorKind::Bm => bm_generator(h, couplings, bath),
        GeneratorKind::Bms => bms_generator(h, couplings, bath),
        GeneratorKind::Cg { tau } => cg_generator(h, couplings, bath, tau),
    }
}

/// Distinct Bohr frequencies E_x - E_y, clustered with the degeneracy tolerance.
#[derive(Debug, Clone)]
pub struct BohrTable {
    pub freqs: Vec<f64>,
    index: Vec<usize>,
    n: usize,
}

impl BohrTable {
    pub fn new(basis: &EnergyBasis) -> Self {
        let n = basis.dim();
        let mut raw: Vec<f64> = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                raw.push(basis.bohr(x, y));
            }
        }
        let mut sorted = raw.clone();
        sorted.sort_by(f64::total_cmp);
        let tol = basis.degeneracy_tol;
        let mut freqs: Vec<f64> = Vec::new();
        for v in sorted {
            match freqs.last() {
                Some(&f) if v - f <= tol => {}
                _ => freqs.push(v),
            }
        }
        // Snap the cluster containing zero exactly onto zero.
        for f in &mut freqs {
            if f.abs() <= tol {
                *f = 0.0;
            }
        }
        let index = raw
            .iter()
            .map(|&v| {
                let k = freqs.partition_point(|&f| f < v - tol);
                k.min(freqs.len() - 1)
            })
            .collect();
        Self { freqs, index, n }
    }

    /// Index of E_x - E_y.
    pub fn of(&self, x: usize, y: usize) -> usize {
        self.index[x * self.n + y]
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn zero(&self) -> Option<usize> {
        self.freqs.iter().position(|&f| f == 0.0)
    }
}

/// Coupling operators prepared for a bath: reduced to one channel when the
/// two operators are parallel (the odd channel then cancels identically).
#[derive(Debug, Clone)]
pub(crate) struct Setup<'a> {
    pub basis: EnergyBasis,
    pub bohr: BohrTable,
    pub bath: &'a Bath,
    /// `parts[A][k]` is channel operator A restricted to Bohr frequency k, computational basis.
    pub parts: Vec<Vec<Option<CMatrix>>>,
    /// Channel operators in the energy basis.
    pub ops_e: Vec<CMatrix>,
    pub two: bool,
    pub even_scale: f64,
}

fn parallel_factor(r: &CMatrix, i: &CMatrix) -> Option<f64> {
    let rr: f64 = r.iter().map(|z| z.norm_sqr()).sum();
    if rr == 0.0 {
        return None;
    }
    let ri: f64 = r.iter().zip(i.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    let c = ri / rr;
    let resid = r.iter().zip(i.iter()).map(|(a, b)| (b - a * c).norm()).fold(0.0, f64::max);
    let scale = max_abs(r).max(max_abs(i));
    (resid <= 1e-12 * scale).then_some(c)
}

impl<'a> Setup<'a> {
    pub fn new(h: &CMatrix, couplings: &CouplingOperators, bath: &'a Bath) -> Result<Self> {
        let n = h.nrows();
        for op in [&couplings.sigma_r, &couplings.sigma_i] {
            if op.nrows() != n || op.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: op.nrows() });
            }
            let d = crate::qmatrix::hermiticity_defect(op);
            if d > 1e-12 {
                return Err(Error::NonHermitianInput { defect: d });
            }
        }
        let basis = eigh(h)?;
        let bohr = BohrTable::new(&basis);
        let zero_r = max_abs(&couplings.sigma_r) == 0.0;
        let zero_i = max_abs(&couplings.sigma_i) == 0.0;

        let (ops, two, even_scale) = if bath.channels() == 1 {
            if !zero_i {
                return Err(Error::InvalidSpec("a single-channel bath needs a real coupling (Sigma_I = 0)".into()));
            }
            (vec![couplings.sigma_r.clone()], false, 1.0)
        } else if zero_i {
            (vec![couplings.sigma_r.clone()], false, 1.0)
        } else if zero_r {
            (vec![couplings.sigma_i.clone()], false, 1.0)
        } else if let Some(c) = parallel_factor(&couplings.sigma_r, &couplings.sigma_i) {
            (vec![couplings.sigma_r.clone()], false, 1.0 + c * c)
        } else {
            (vec![couplings.sigma_r.clone(), couplings.sigma_i.clone()], true, 1.0)
        };

        let ops_e: Vec<CMatrix> = ops.iter().map(|op| basis.to_energy(op)).collect();
        let parts = ops_e
            .iter()
            .map(|e| {
                let mut split: Vec<Option<CMatrix>> = vec![None; bohr.len()];
                for x in 0..n {
                    for y in 0..n {
                        let v = e[(x, y)];
                        if v.norm() <= 1e-14 * max_abs(e).max(1e-300) {
                            continue;
                        }
                        let k = bohr.of(x, y);
                        split[k].get_or_insert_with(|| CMatrix::zeros(n, n))[(x, y)] = v;
                    }
                }
                split.into_iter().map(|m| m.map(|m| basis.to_computational(&m))).collect()
            })
            .collect();
        Ok(Self { basis, bohr, bath, parts, ops_e, two, even_scale })
    }

    pub fn channels(&self) -> usize {
        self.parts.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn part(&self, channel: usize, k: usize) -> Option<&CMatrix> {
        self.parts[channel][k].as_ref()
    }

    pub fn active(&self, k: usize) -> bool {
        self.parts.iter().any(|p| p[k].is_some())
    }

    fn reduce(&self, p: ChannelPair) -> CMatrix {
        if self.two {
            p.matrix(2)
        } else {
            CMatrix::from_element(1, 1, p.scalar * self.even_scale)
        }
    }

    /// gamma_AB(w) in channel space.
    pub fn gamma(&self, w: f64) -> Result<CMatrix> {
        Ok(self.reduce(self.bath.gamma_parts(w)?))
    }

    /// sigma_AB(w) in channel space. The odd channel is only evaluated when
    /// `odd_needed` reports that it does not cancel.
    pub fn sigma<F: Fn() -> bool>(&self, w: f64, odd_needed: F) -> Result<CMatrix> {
        if !self.two {
            return Ok(self.reduce(self.bath.sigma_parts(w, false)?));
        }
        match self.bath.sigma_parts(w, true) {
            Ok(p) => Ok(p.matrix(2)),
            Err(Error::DivergentLimit(msg)) => {
                if odd_needed() {
                    Err(Error::DivergentLimit(format!(
                        "{msg}; two non-parallel coupling operators have zero-frequency components"
                    )))
                } else {
                    Ok(self.bath.sigma_parts(w, false)?.matrix(2))
                }
            }
            Err(e) => Err(e),
        }
    }

    /// Sinc-pair integrals of the gamma (or sigma) components at Bohr indices
    /// (p, q), as a channel-space matrix.
    pub fn sinc(&self, sigma: bool, p: usize, q: usize, tau: f64) -> Result<CMatrix> {
        let (fp, fq) = (self.bohr.freqs[p], self.bohr.freqs[q]);
        let (ce, co) = if sigma {
            (Component::SigmaEven, Component::SigmaOdd)
        } else {
            (Component::GammaEven, Component::GammaOdd)
        };
        let even = self.bath.sinc_component(ce, fp, fq, tau)?;
        let odd = if self.two { self.bath.sinc_component(co, fp, fq, tau)? } else { 0.0 };
        let pair = ChannelPair { scalar: C64::from(even), odd: C64::from(odd) };
        let m = self.reduce(pair);
        Ok(if sigma { m * I } else { m })
    }
}

/// l += c (X rho Y^dagger - {Y^dagger X, rho}/2).
pub(crate) fn add_dissipator_term(l: &mut Superoperator, c: C64, x: &CMatrix, y: &CMatrix) {
    if c == C64::default() {
        return;
    }
    let yd = y.adjoint();
    l.add_sandwich(c, x, &yd);
    let yx = crate::qmatrix::matmul(&yd, x);
    l.add_left(-0.5 * c, &yx);
    l.add_right(-0.5 * c, &yx);
}

/// Born-Markov generator: -i[H, rho] + lambda^2 sum_A ([Y_A rho, A_A] + [A_A, rho Y_A^dagger])
/// with Y_A = sum_B sum_w Gamma_AB(w) A_B(w).
pub fn bm_generator(h: &CMatrix, couplings: &CouplingOperators, bath: &Bath) -> Result<Superoperator> {
    let setup = Setup::new(h, couplings, bath)?;
    let l = Superoperator::hamiltonian(h);
    let lam2 = bath.lambda().powi(2);
    if lam2 == 0.0 {
        return Ok(l);
    }
    let n = setup.dim();
    let m = setup.channels();
    let full: Vec<CMatrix> = (0..m)
        .map(|a| (0..setup.bohr.len()).filter_map(|k| setup.part(a, k)).fold(CMatrix::zeros(n, n), |acc, x| acc + x))
        .collect();
    let mut y = vec![CMatrix::zeros(n, n); m];
    for k in 0..setup.bohr.len() {
        if !setup.active(k) {
            continue;
        }
        // Element (x, y) of A[k] has E_y - E_x = -freq.
        let w = -setup.bohr.freqs[k];
        let odd_needed = || {
            let (Some(a1), Some(a2)) = (setup.part(0, k), setup.part(1, k)) else {
                return setup.part(0, k).is_some() || setup.part(1, k).is_some();
            };
            let mut probe = Superoperator::zeros(n);
            let ys = [a2 * C64::from(0.5), a1 * C64::from(-0.5)];
            for a in 0..2 {
                add_bm_pair(&mut probe, &ys[a], &full[a]);
            }
            probe.max_abs() > 1e-13 * (max_abs(a1) * max_abs(&full[1]) + max_abs(a2) * max_abs(&full[0]))
        };
        let gam = setup.gamma(w)?;
        let sig = setup.sigma(w, odd_needed)?;
        let big_gamma = (gam + sig) * C64::from(0.5);
        for a in 0..m {
            for b in 0..m {
                if let Some(part) = setup.part(b, k) {
                    y[a] += part * big_gamma[(a, b)];
                }
            }
        }
    }
    let mut d = Superoperator::zeros(n);
    for a in 0..m {
        add_bm_pair(&mut d, &y[a], &full[a]);
    }
    Ok(l + scale(d, lam2))
}

/// [Y rho, A] + [A, rho Y^dagger].
fn add_bm_pair(l: &mut Superoperator, y: &CMatrix, a: &CMatrix) {
    let one = C64::from(1.0);
    let yd = y.adjoint();
    l.add_sandwich(one, y, a);
    l.add_left(-one, &crate::qmatrix::matmul(a, y));
    l.add_sandwich(one, a, &yd);
    l.add_right(-one, &crate::qmatrix::matmul(&yd, a));
}

fn scale(l: Superoperator, c: f64) -> Superoperator {
    let n = l.n();
    Superoperator::from_matrix(n, l.into_matrix() * C64::from(c)).expect("same shape")
}

/// Secular Lindblad generator with Lamb shift
/// H_LS = (lambda^2 / 2i) sum_w sum_AB sigma_AB(w) A_A(w)^dagger A_B(w).
pub fn bms_generator(h: &CMatrix, couplings: &CouplingOperators, bath: &Bath) -> Result<Superoperator> {
    let setup = Setup::new(h, couplings, bath)?;
    let lam2 = bath.lambda().powi(2);
    let l = Superoperator::hamiltonian(h);
    if lam2 == 0.0 {
        return Ok(l);
    }
    let (n, m) = (setup.dim(), setup.channels());
    let mut lamb = CMatrix::zeros(n, n);
    let mut d = Superoperator::zeros(n);
    for k in 0..setup.bohr.len() {
        if !setup.active(k) {
            continue;
        }
        let w = -setup.bohr.freqs[k];
        let gam = setup.gamma(w)?;
        let odd_needed = || match (setup.part(0, k), setup.part(1, k)) {
            (Some(a1), Some(a2)) => {
                let c = crate::qmatrix::commutator(a1, a2);
                max_abs(&c) > 1e-13 * max_abs(a1) * max_abs(a2)
            }
            _ => false,
        };
        let sig = setup.sigma(w, odd_needed)?;
        for a in 0..m {
            for b in 0..m {
                let (Some(xa), Some(xb)) = (setup.part(a, k), setup.part(b, k)) else { continue };
                add_dissipator_term(&mut d, gam[(a, b)], xb, xa);
                lamb += crate::qmatrix::matmul(&xa.adjoint(), xb) * (sig[(a, b)] / (2.0 * I));
            }
        }
    }
    let lamb = (&lamb + lamb.adjoint()) * C64::from(0.5);
    Ok(l + scale(Superoperator::hamiltonian(&lamb) + d, lam2))
}

/// The BMS dampening matrix gamma~_{(ab),(cd)} on transition pairs, for PSD checks.
pub fn bms_dampening_matrix(h: &CMatrix, couplings: &CouplingOperators, bath: &Bath) -> Result<CMatrix> {
    let setup = Setup::new(h, couplings, bath)?;
    let lam2 = bath.lambda().powi(2);
    let (n, m) = (setup.dim(), setup.channels());
    let ops_e = &setup.ops_e;
    let mut out = CMatrix::zeros(n * n, n * n);
    let mut cache: Vec<Option<CMatrix>> = vec![None; setup.bohr.len()];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for dd in 0..n {
                    let k = setup.bohr.of(a, b);
                    if setup.bohr.of(c, dd) != k {
                        continue;
                    }
                    if cache[k].is_none() {
                        cache[k] = Some(setup.gamma(-setup.bohr.freqs[k])?);
                    }
                    let g = cache[k].as_ref().unwrap();
                    let mut v = C64::default();
                    for ca in 0..m {
                        for cb in 0..m {
                            v += g[(ca, cb)] * ops_e[cb][(a, b)] * ops_e[ca][(c, dd)].conj();
                        }
                    }
                    out[(a * n + b, c * n + dd)] = v * lam2;
                }
            }
        }
    }
    Ok(out)
}

/// A(w) = sum_{E_b - E_a = w} |a><a|A|b><b| in the computational basis,
/// sorted by w.
pub fn eigenoperator_decomposition(a: &CMatrix, basis: &EnergyBasis) -> Result<Vec<(f64, CMatrix)>> {
    let d = crate::qmatrix::hermiticity_defect(a);
    if d > 1e-12 {
        return Err(Error::NonHermitianInput { defect: d });
    }
    let bohr = BohrTable::new(basis);
    let n = basis.dim();
    let e = basis.to_energy(a);
    let mut parts: Vec<Option<CMatrix>> = vec![None; bohr.len()];
    for x in 0..n {
        for y in 0..n {
            if e[(x, y)] == C64::default() {
                continue;
            }
            let k = bohr.of(y, x);
            parts[k].get_or_insert_with(|| CMatrix::zeros(n, n))[(x, y)] = e[(x, y)];
        }
    }
    let mut out: Vec<(f64, CMatrix)> = Vec::new();
    for (k, p) in parts.into_iter().enumerate() {
        if let Some(p) = p {
            let m = basis.to_computational(&p);
            if max_abs(&m) > 1e-14 * max_abs(a) {
                out.push((bohr.freqs[k], m));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathSpec;
    use crate::qmatrix::max_abs_diff;
    use crate::spinsys::{pauli, Axis};

    fn qubit_h() -> CMatrix {
        CMatrix::from_diagonal(&crate::qmatrix::CVector::from_vec(vec![C64::from(0.0), C64::from(1.0)]))
    }

    fn real_coupling(a: CMatrix) -> CouplingOperators {
        let n = a.nrows();
        CouplingOperators { sigma_r: a, sigma_i: CMatrix::zeros(n, n) }
    }

    #[test]
    fn zero_coupling_leaves_hamiltonian_part() {
        let bath = Bath::new(BathSpec::drude(1.0, 1.0, 0.0)).unwrap();
        let h = qubit_h();
        let c = real_coupling(pauli(Axis::X));
        let bare = Superoperator::hamiltonian(&h);
        assert_eq!(bm_generator(&h, &c, &bath).unwrap(), bare);
        assert_eq!(bms_generator(&h, &c, &bath).unwrap(), bare);
    }

    #[test]
    fn pure_dephasing_bm_equals_bms() {
        let bath = Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, 1.0, 0.1)).unwrap();
        let h = qubit_h();
        let c = real_coupling(pauli(Axis::Z));
        let bm = bm_generator(&h, &c, &bath).unwrap();
        let bms = bms_generator(&h, &c, &bath).unwrap();
        assert!(bm.max_abs_diff(&bms) < 1e-12, "{}", bm.max_abs_diff(&bms));
    }

    #[test]
    fn drude_dissipative_bm_closed_form() {
        // Explicit Drude BM equation for H = diag(0,1), A = sigma_x, built from
        // the coefficients 1/(1+tau^2) and tau/(1+tau^2).
        let (tau_b, lam) = (1.7, 0.3);
        let bath = Bath::new(BathSpec::drude(tau_b, 1.0, lam)).unwrap();
        let h = qubit_h();
        let sx = pauli(Axis::X);
        let sy = pauli(Axis::Y);
        let l = bm_generator(&h, &real_coupling(sx.clone()), &bath).unwrap();
        let g = 1.0 / (1.0 + tau_b * tau_b);
        let s = tau_b / (1.0 + tau_b * tau_b);
        // Gamma(+1) = (g + i s)/2 and Gamma(-1) = (g - i s)/2, so
        // Y = (g/2) sigma_x + (s/2) sigma_y... with sign fixed by the transition direction.
        // sigma^+ = |0><1| carries E_1 - E_0 = +1.
        let sp = CMatrix::from_row_slice(2, 2, &[C64::from(0.0), C64::from(1.0), C64::from(0.0), C64::from(0.0)]);
        let sm = sp.transpose();
        let y = &sp * C64::new(g / 2.0, s / 2.0) + &sm * C64::new(g / 2.0, -s / 2.0);
        let mut expect = Superoperator::hamiltonian(&h);
        let mut d = Superoperator::zeros(2);
        add_bm_pair(&mut d, &y, &sx);
        expect = expect + scale(d, lam * lam);
        assert!(l.max_abs_diff(&expect) < 1e-14);
        // y = (g/2) sigma_x - (s/2) sigma_y written out.
        let y2 = &sx * C64::from(g / 2.0) - &sy * C64::from(s / 2.0);
        assert!(max_abs_diff(&y, &y2) < 1e-15);
    }

    #[test]
    fn eigenoperators_of_sigma_x() {
        let basis = eigh(&qubit_h()).unwrap();
        let parts = eigenoperator_decomposition(&pauli(Axis::X), &basis).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, -1.0);
        assert_eq!(parts[1].0, 1.0);
        // w = +1 keeps <0|A|1>, the lowering direction in energy.
        assert_eq!(parts[1].1[(0, 1)], C64::from(1.0));
        assert_eq!(parts[1].1[(1, 0)], C64::from(0.0));
        let hz = pauli(Axis::Z) * C64::from(0.5);
        let parts = eigenoperator_decomposition(&pauli(Axis::Z), &eigh(&hz).unwrap()).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, 0.0);
        assert!(max_abs_diff(&parts[0].1, &pauli(Axis::Z)) < 1e-15);
    }
}
