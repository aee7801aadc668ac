//! Spin Hamiltonians of the quadratic Pauli form, Exact Cover 3 encodings and
//! the collective coupling operators.
//!
//! Spin 1 is the most significant qubit: computational index
//! `b_1 b_2 ... b_n` read as a binary number, with `|0>` the `+1` eigenstate
//! of `sigma^z`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::qmatrix::{CMatrix, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }

    pub fn from_label(c: char) -> Option<Axis> {
        match c {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

pub fn pauli(axis: Axis) -> CMatrix {
    let (o, z) = (C64::from(1.0), C64::from(0.0));
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// sigma^axis acting on spin `i` (0-based) of `n`.
pub fn spin_operator(n: usize, i: usize, axis: Axis) -> CMatrix {
    let mut op = CMatrix::identity(1, 1);
    for k in 0..n {
        let f = if k == i { pauli(axis) } else { CMatrix::identity(2, 2) };
        op = op.kronecker(&f);
    }
    op
}

/// Key of a two-body coefficient gamma_ij^{alpha beta}, with `i < j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairKey {
    pub i: usize,
    pub j: usize,
    pub alpha: Axis,
    pub beta: Axis,
}

/// H = gamma0 + sum_i gamma_i . sigma_i + sum_{i<j} gamma_ij^{ab} sigma_i^a sigma_j^b,
/// plus a complex coupling vector per spin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSpec {
    pub n: usize,
    pub gamma0: f64,
    pub linear: Vec<[f64; 3]>,
    pub quadratic: BTreeMap<PairKey, f64>,
    pub couplings: Vec<[C64; 3]>,
}

impl SpinSpec {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gamma0: 0.0,
            linear: vec![[0.0; 3]; n],
            quadratic: BTreeMap::new(),
            couplings: vec![[C64::from(0.0); 3]; n],
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn set_linear(&mut self, i: usize, axis: Axis, value: f64) -> &mut Self {
        self.linear[i][axis.index()] = value;
        self
    }

    /// Stores gamma_ij^{alpha beta}; spins are swapped into `i < j` order.
    pub fn set_quadratic(&mut self, i: usize, j: usize, alpha: Axis, beta: Axis, value: f64) -> &mut Self {
        let key = if i < j { PairKey { i, j, alpha, beta } } else { PairKey { i: j, j: i, alpha: beta, beta: alpha } };
        if value == 0.0 {
            self.quadratic.remove(&key);
        } else {
            self.quadratic.insert(key, value);
        }
        self
    }

    pub fn set_coupling(&mut self, i: usize, n: [C64; 3]) -> &mut Self {
        self.couplings[i] = n;
        self
    }

    /// The same coupling vector on every spin.
    pub fn with_uniform_coupling(mut self, n: [C64; 3]) -> Self {
        for c in &mut self.couplings {
            *c = n;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.n) {
            return Err(Error::InvalidSpec(format!("spin count must be 1..=5, got {}", self.n)));
        }
        if self.linear.len() != self.n || self.couplings.len() != self.n {
            return Err(Error::InvalidSpec("per-spin vectors must have one entry per spin".into()));
        }
        let finite = self.gamma0.is_finite()
            && self.linear.iter().flatten().all(|v| v.is_finite())
            && self.quadratic.values().all(|v| v.is_finite())
            && self.couplings.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("coefficients must be finite".into()));
        }
        for k in self.quadratic.keys() {
            if k.i >= k.j || k.j >= self.n {
                return Err(Error::InvalidSpec(format!("quadratic key ({}, {}) needs i < j < n", k.i + 1, k.j + 1)));
            }
        }
        Ok(())
    }
}

pub fn build_hamiltonian(spec: &SpinSpec) -> CMatrix {
    let n = spec.n;
    let dim = 1 << n;
    let mut h = CMatrix::identity(dim, dim) * C64::from(spec.gamma0);
    for i in 0..n {
        for axis in Axis::ALL {
            let g = spec.linear[i][axis.index()];
            if g != 0.0 {
                h += spin_operator(n, i, axis) * C64::from(g);
            }
        }
    }
    for (k, &g) in &spec.quadratic {
        h += spin_operator(n, k.i, k.alpha) * spin_operator(n, k.j, k.beta) * C64::from(g);
    }
    h
}

/// Sigma_R and Sigma_I, the Hermitian parts of sum_i n_i . sigma_i.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOperators {
    pub sigma_r: CMatrix,
    pub sigma_i: CMatrix,
}

pub fn coupling_operators(spec: &SpinSpec) -> CouplingOperators {
    let dim = spec.dim();
    let mut sigma_r = CMatrix::zeros(dim, dim);
    let mut sigma_i = CMatrix::zeros(dim, dim);
    for (i, nv) in spec.couplings.iter().enumerate() {
        for axis in Axis::ALL {
            let c = nv[axis.index()];
            if c.re != 0.0 {
                sigma_r += spin_operator(spec.n, i, axis) * C64::from(c.re);
            }
            if c.im != 0.0 {
                sigma_i += spin_operator(spec.n, i, axis) * C64::from(c.im);
            }
        }
    }
    CouplingOperators { sigma_r, sigma_i }
}

/// Ising encoding of Exact Cover 3: the energy of bit string `b` is
/// sum over clauses of (b_p + b_q + b_r - 1)^2. Clause positions are 1-based.
pub fn exact_cover_spec(n: usize, clauses: &[[usize; 3]]) -> Result<SpinSpec> {
    let mut spec = SpinSpec::new(n);
    spec.gamma0 = clauses.len() as f64;
    for clause in clauses {
        let [p, q, r] = *clause;
        let bad = || Error::InvalidClause { clause: clause.to_vec(), bits: n };
        if [p, q, r].iter().any(|&x| x == 0 || x > n) || p == q || q == r || p == r {
            return Err(bad());
        }
        let idx = [p - 1, q - 1, r - 1];
        for &i in &idx {
            spec.linear[i][Axis::Z.index()] -= 0.5;
        }
        for a in 0..3 {
            for b in a + 1..3 {
                let (i, j) = (idx[a].min(idx[b]), idx[a].max(idx[b]));
                let key = PairKey { i, j, alpha: Axis::Z, beta: Axis::Z };
                *spec.quadratic.entry(key).or_insert(0.0) += 0.5;
            }
        }
    }
    Ok(spec)
}

/// Computational index of a bit string such as "10100" (spin 1 first).
pub fn bitstring_index(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > 5 {
        return Err(Error::InvalidSpec(format!("bit string '{bits}' must have 1..=5 bits")));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidSpec(format!("bit string '{bits}' contains '{c}'"))),
    })
}

pub fn index_bitstring(index: usize, n: usize) -> String {
    (0..n).map(|k| if index >> (n - 1 - k) & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_of(h: &CMatrix) -> Vec<f64> {
        (0..h.nrows()).map(|i| h[(i, i)].re).collect()
    }

    #[test]
    fn qubit_hamiltonian() {
        let mut s = SpinSpec::new(1);
        s.gamma0 = 0.5;
        s.set_linear(0, Axis::Z, -0.5);
        assert_eq!(diag_of(&build_hamiltonian(&s)), vec![0.0, 1.0]);
        assert_eq!(build_hamiltonian(&SpinSpec::new(1)), CMatrix::zeros(2, 2));
    }

    #[test]
    fn two_spin_degenerate_spectrum() {
        let mut s = SpinSpec::new(2);
        s.gamma0 = 1.0;
        s.set_linear(0, Axis::Z, -0.5).set_linear(1, Axis::Z, -0.5);
        let mut d = diag_of(&build_hamiltonian(&s));
        d.sort_by(f64::total_cmp);
        assert_eq!(d, vec![0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn spin_one_is_most_significant() {
        let z1 = spin_operator(2, 0, Axis::Z);
        assert_eq!(diag_of(&z1), vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(bitstring_index("10100").unwrap(), 20);
        assert_eq!(index_bitstring(20, 5), "10100");
    }

    #[test]
    fn listed_exact_cover_coefficients() {
        let s = exact_cover_spec(5, &[[2, 3, 4], [1, 2, 5], [1, 4, 5], [3, 4, 5]]).unwrap();
        assert_eq!(s.gamma0, 4.0);
        let gz: Vec<f64> = s.linear.iter().map(|v| v[2]).collect();
        assert_eq!(gz, vec![-1.0, -1.0, -1.0, -1.5, -1.5]);
        let zz = |i: usize, j: usize| {
            s.quadratic.get(&PairKey { i: i - 1, j: j - 1, alpha: Axis::Z, beta: Axis::Z }).cloned().unwrap_or(0.0)
        };
        for (i, j) in [(1, 2), (1, 4), (2, 3), (2, 4), (2, 5), (3, 5)] {
            assert_eq!(zz(i, j), 0.5, "({i},{j})");
        }
        for (i, j) in [(1, 5), (3, 4), (4, 5)] {
            assert_eq!(zz(i, j), 1.0, "({i},{j})");
        }
        assert_eq!(zz(1, 3), 0.0);
        assert_eq!(s.quadratic.len(), 9);
    }

    #[test]
    fn exact_cover_rejects_bad_clauses() {
        assert!(matches!(exact_cover_spec(3, &[[1, 1, 2]]), Err(Error::InvalidClause { .. })));
        assert!(matches!(exact_cover_spec(3, &[[1, 2, 4]]), Err(Error::InvalidClause { .. })));
        assert!(matches!(exact_cover_spec(3, &[[0, 1, 2]]), Err(Error::InvalidClause { .. })));
        let empty = exact_cover_spec(3, &[]).unwrap();
        assert_eq!(empty.gamma0, 0.0);
        assert!(empty.quadratic.is_empty());
    }

    #[test]
    fn single_clause_zero_energy_states() {
        let h = build_hamiltonian(&exact_cover_spec(3, &[[1, 2, 3]]).unwrap());
        for idx in 0..8 {
            let ones = (idx as u32).count_ones();
            assert_eq!(h[(idx, idx)].re == 0.0, ones == 1, "state {idx:03b}");
        }
    }

    #[test]
    fn coupling_examples() {
        let o = C64::from(1.0);
        let z = C64::from(0.0);
        let s = SpinSpec::new(1).with_uniform_coupling([z, z, o]);
        let c = coupling_operators(&s);
        assert_eq!(c.sigma_r, pauli(Axis::Z));
        assert_eq!(c.sigma_i, CMatrix::zeros(2, 2));

        let v = C64::new(1.0, 1.0) / 2f64.sqrt();
        let c = coupling_operators(&SpinSpec::new(1).with_uniform_coupling([v; 3]));
        let expect = (pauli(Axis::X) + pauli(Axis::Y) + pauli(Axis::Z)) / C64::from(2f64.sqrt());
        assert!(crate::qmatrix::max_abs_diff(&c.sigma_r, &expect) < 1e-15);
        assert_eq!(c.sigma_r, c.sigma_i);

        let c = coupling_operators(&SpinSpec::new(2));
        assert_eq!(c.sigma_r, CMatrix::zeros(4, 4));
    }
}
