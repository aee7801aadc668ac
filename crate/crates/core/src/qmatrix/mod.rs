//! Dense complex linear algebra: Hermitian eigendecomposition with a fixed
//! gauge, matrix exponentials, the pair-index vectorization used by every
//! superoperator, and eigenvalue diagnostics for density matrices.

mod expm;
mod superop;

pub use expm::{expm, expm_apply, Propagator};
pub use superop::Superoperator;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance on max |H - H^dagger| accepted by the Hermitian routines.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: m.nrows().max(1), got: m.ncols() });
    }
    Ok(m.nrows())
}

fn require_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let defect = hermiticity_defect(m);
    if !(defect <= tol) {
        return Err(Error::NonHermitianInput { defect });
    }
    Ok(())
}

/// (M + M^dagger) / 2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues and eigenvectors of a Hermitian system Hamiltonian.
///
/// `energies` ascend; column `a` of `vectors` is |a>. Levels closer than
/// `degeneracy_tol` to the first member of their class share a class, and
/// `levels` holds the mean energy of each class.
#[derive(Debug, Clone)]
pub struct EnergyBasis {
    pub energies: Vec<f64>,
    pub vectors: CMatrix,
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub levels: Vec<f64>,
    pub degeneracy_tol: f64,
}

impl EnergyBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Energy of `a` snapped to its degeneracy class.
    pub fn level(&self, a: usize) -> f64 {
        self.levels[self.class_of[a]]
    }

    /// Bohr frequency E_a - E_b built from class levels, so that it is exactly
    /// antisymmetric and exactly zero inside a class.
    pub fn bohr(&self, a: usize, b: usize) -> f64 {
        if self.class_of[a] == self.class_of[b] {
            0.0
        } else {
            self.level(a) - self.level(b)
        }
    }

    pub fn degenerate(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    /// V^dagger M V.
    pub fn to_energy(&self, m: &CMatrix) -> CMatrix {
        matmul(&matmul(&self.vectors.adjoint(), m), &self.vectors)
    }

    /// V M V^dagger.
    pub fn to_computational(&self, m: &CMatrix) -> CMatrix {
        matmul(&matmul(&self.vectors, m), &self.vectors.adjoint())
    }
}

pub fn degeneracy_tolerance(energies: &[f64]) -> f64 {
    let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    1e-9 * (hi - lo).max(1.0)
}

/// Hermitian eigendecomposition with ascending energies and a fixed gauge:
/// the largest-magnitude entry of every eigenvector is real and positive.
pub fn eigh(h: &CMatrix) -> Result<EnergyBasis> {
    let n = require_square(h)?;
    require_hermitian(h, HERMITIAN_TOL)?;
    let eig = hermitian_part(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        // First entry within rounding of the maximum, so ties resolve the same way every call.
        let pivot = v.iter().position(|z| z.norm() >= big * (1.0 - 1e-12)).unwrap_or(0);
        let phase = v[pivot].conj() / v[pivot].norm();
        for r in 0..n {
            vectors[(r, col)] = v[r] * phase;
        }
        vectors[(pivot, col)] = C64::new(vectors[(pivot, col)].norm(), 0.0);
    }

    let tol = degeneracy_tolerance(&energies);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![0; n];
    for a in 0..n {
        match classes.last_mut() {
            Some(cls) if energies[a] - energies[cls[0]] <= tol => cls.push(a),
            _ => classes.push(vec![a]),
        }
        class_of[a] = classes.len() - 1;
    }
    let levels = classes.iter().map(|cls| cls.iter().map(|&a| energies[a]).sum::<f64>() / cls.len() as f64).collect();

    Ok(EnergyBasis { energies, vectors, classes, class_of, levels, degeneracy_tol: tol })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    require_square(m)?;
    require_hermitian(m, 1e-9 * max_abs(m).max(1.0))?;
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn min_eigenvalue(rho: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(rho)?[0])
}

/// Eigenvalues of a general complex matrix, sorted by real part descending.
pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    require_square(m)?;
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let mut ev: Vec<C64> = match schur.eigenvalues() {
        Some(v) => v.iter().cloned().collect(),
        None => schur.unpack().1.diagonal().iter().cloned().collect(),
    };
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(ev)
}

/// Row-major vectorization: entry (a, b) lands at a*N + b.
pub fn vec(rho: &CMatrix) -> CVector {
    let n = rho.nrows();
    CVector::from_fn(n * rho.ncols(), |k, _| rho[(k / n, k % n)])
}

pub fn unvec(v: &CVector) -> Result<CMatrix> {
    let len = v.len();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len || n == 0 {
        return Err(Error::DimensionMismatch { expected: n.max(1) * n.max(1), got: len });
    }
    Ok(CMatrix::from_fn(n, n, |a, b| v[a * n + b]))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(a, b) - matmul(b, a)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Dense product. Large operands go through a cache-blocked kernel, which is
/// several times faster than the generic loop at superoperator sizes.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows(), "matmul shape mismatch");
    if m * k * n < 32 * 32 * 32 {
        return a * b;
    }
    let mut c = CMatrix::zeros(m, n);
    // SAFETY: Complex64 is repr(C) with layout [re, im]; nalgebra storage is
    // contiguous column-major, so strides are (1, nrows).
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}
