use super::{matmul, unvec, vec, CMatrix, CVector, C64, I};
use crate::error::{Error, Result};

/// Linear map on N x N matrices stored as an N^2 x N^2 matrix with
/// (L rho)_{ab} = sum_{cd} L[(a,b),(c,d)] rho_{cd}.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    n: usize,
    m: CMatrix,
}

impl Superoperator {
    pub fn zeros(n: usize) -> Self {
        Self { n, m: CMatrix::zeros(n * n, n * n) }
    }

    pub fn from_matrix(n: usize, m: CMatrix) -> Result<Self> {
        if m.nrows() != n * n || m.ncols() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: m.nrows() });
        }
        Ok(Self { n, m })
    }

    /// rho -> -i[H, rho].
    pub fn hamiltonian(h: &CMatrix) -> Self {
        let mut l = Self::zeros(h.nrows());
        l.add_left(-I, h);
        l.add_right(I, h);
        l
    }

    /// Hilbert space dimension N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Superoperator dimension N^2.
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        self.m[(a * self.n + b, c * self.n + d)]
    }

    pub fn add(&mut self, a: usize, b: usize, c: usize, d: usize, v: C64) {
        let n = self.n;
        self.m[(a * n + b, c * n + d)] += v;
    }

    /// rho -> coeff * X rho.
    pub fn add_left(&mut self, coeff: C64, x: &CMatrix) {
        let n = self.n;
        for i in 0..n {
            for k in 0..n {
                let v = coeff * x[(i, k)];
                if v == C64::default() {
                    continue;
                }
                for j in 0..n {
                    self.m[(i * n + j, k * n + j)] += v;
                }
            }
        }
    }

    /// rho -> coeff * rho Y.
    pub fn add_right(&mut self, coeff: C64, y: &CMatrix) {
        let n = self.n;
        for l in 0..n {
            for j in 0..n {
                let v = coeff * y[(l, j)];
                if v == C64::default() {
                    continue;
                }
                for i in 0..n {
                    self.m[(i * n + j, i * n + l)] += v;
                }
            }
        }
    }

    /// rho -> coeff * X rho Y.
    pub fn add_sandwich(&mut self, coeff: C64, x: &CMatrix, y: &CMatrix) {
        let n = self.n;
        for i in 0..n {
            for k in 0..n {
                let xv = coeff * x[(i, k)];
                if xv == C64::default() {
                    continue;
                }
                for l in 0..n {
                    for j in 0..n {
                        self.m[(i * n + j, k * n + l)] += xv * y[(l, j)];
                    }
                }
            }
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.n || rho.ncols() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: rho.nrows() });
        }
        unvec(&self.apply_vec(&vec(rho)))
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        &self.m * v
    }

    /// Conjugate by the basis change rho -> V rho V^dagger: returns the map
    /// rho -> V L(V^dagger rho V) V^dagger.
    pub fn change_basis(&self, v: &CMatrix) -> Self {
        let u = v.kronecker(&v.map(|z| z.conj()));
        let m = matmul(&matmul(&u, &self.m), &u.adjoint());
        Self { n: self.n, m }
    }

    /// max over (c,d) of |sum_a L[(a,a),(c,d)]|.
    pub fn trace_defect(&self) -> f64 {
        let n = self.n;
        (0..n * n).map(|col| (0..n).map(|a| self.m[(a * n + a, col)]).sum::<C64>().norm()).fold(0.0, f64::max)
    }

    /// max |L[(a,b),(c,d)] - conj(L[(b,a),(d,c)])|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let x = self.get(a, b, c, d) - self.get(b, a, d, c).conj();
                        worst = worst.max(x.norm());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        super::max_abs(&self.m)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        super::max_abs_diff(&self.m, &other.m)
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        super::general_eigenvalues(&self.m)
    }
}

impl std::ops::Add for Superoperator {
    type Output = Superoperator;
    fn add(mut self, rhs: Self) -> Self {
        self.m += rhs.m;
        self
    }
}
