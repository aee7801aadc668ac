//! Time evolution under constant generators, the adaptive coarse-graining
//! schedule `rho^t(t)`, the auxiliary-operator Born solver for exponentially
//! decaying correlations, and closed-form dephasing oracles.

mod born;
mod dephasing;
pub mod rk4;

pub use born::{born_dephasing_closed_form, born_exponential_solver, markov_limit_qubit, BornAxis};
pub use dephasing::{drude_dephasing, exact_dephasing};
pub use rk4::Rk4Options;

use crate::bath::Bath;
use crate::error::{Error, Result};
use crate::liouvillians::cg_generator;
use crate::qmatrix::{
    eigh, expm_apply, hermitian_part, hermiticity_defect, trace, unvec, vec, CMatrix, CVector, Propagator,
    Superoperator, C64,
};
use crate::spinsys::CouplingOperators;

/// A validated density matrix: unit trace, Hermitian, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: m.nrows().max(1), got: m.ncols() });
        }
        let herm = hermiticity_defect(&m);
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = trace(&m);
        if (tr - C64::from(1.0)).norm() > 1e-9 {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = crate::qmatrix::min_eigenvalue(&m)?;
        if min < -1e-7 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(m))
    }

    /// The pure state with every entry equal to 1/dim.
    pub fn uniform_pure(dim: usize) -> Self {
        Self(CMatrix::from_element(dim, dim, C64::from(1.0 / dim as f64)))
    }

    pub fn computational(index: usize, dim: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: index });
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = C64::from(1.0);
        Ok(Self(m))
    }

    /// Projector onto the lowest eigenvector of `h` (gauge of `eigh`).
    pub fn ground(h: &CMatrix) -> Result<Self> {
        let basis = eigh(h)?;
        let v = basis.vectors.column(0);
        Ok(Self(v * v.adjoint()))
    }

    /// e^{-beta H} / Z; `beta = inf` gives the uniform mixture over the ground class.
    pub fn gibbs(h: &CMatrix, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidSpec(format!("inverse temperature must be >= 0, got {beta}")));
        }
        let basis = eigh(h)?;
        let e0 = basis.energies[0];
        let weights: Vec<f64> = basis
            .energies
            .iter()
            .enumerate()
            .map(|(a, &e)| {
                if beta.is_infinite() {
                    if basis.class_of[a] == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (-beta * (e - e0)).exp()
                }
            })
            .collect();
        let z: f64 = weights.iter().sum();
        let n = basis.dim();
        let mut d = CMatrix::zeros(n, n);
        for a in 0..n {
            d[(a, a)] = C64::from(weights[a] / z);
        }
        Ok(Self(hermitian_part(&basis.to_computational(&d))))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Eigenvalues of the Hermitian part, largest first.
    pub eigenvalues: Vec<f64>,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn of(rho: &CMatrix) -> Result<Self> {
        let mut eigenvalues = crate::qmatrix::hermitian_eigenvalues(&hermitian_part(rho))?;
        eigenvalues.reverse();
        Ok(Self {
            min_eigenvalue: *eigenvalues.last().unwrap(),
            eigenvalues,
            trace_error: (trace(rho) - C64::from(1.0)).norm(),
            hermiticity_error: hermiticity_defect(rho),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, rho: CMatrix) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidSpec(format!("time {t} does not follow {last}")));
            }
        }
        self.diagnostics.push(Diagnostics::of(&rho)?);
        self.times.push(t);
        self.states.push(rho);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn element(&self, i: usize, j: usize) -> Vec<C64> {
        self.states.iter().map(|m| m[(i, j)]).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_error).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.hermiticity_error).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.eigenvalues[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn last(&self) -> Option<&CMatrix> {
        self.states.last()
    }
}

/// `points` equally spaced times on [0, t_max].
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidSpec(format!("grid needs t_max > 0 and >= 2 points, got {t_max}, {points}")));
    }
    Ok((0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Expm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub method: Method,
    pub rk4: Rk4Options,
    /// Fail once a state leaves the physical set (min eigenvalue below -1e-7
    /// or trace error above 1e-9) instead of recording it.
    pub abort_on_unphysical: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { method: Method::Rk4, rk4: Rk4Options::default(), abort_on_unphysical: false }
    }
}

impl EvolveOptions {
    pub fn method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }
}

fn check_physical(traj: &Trajectory) -> Result<()> {
    let (Some(&t), Some(d)) = (traj.times.last(), traj.diagnostics.last()) else { return Ok(()) };
    if d.min_eigenvalue < -1e-7 || d.trace_error > 1e-9 {
        return Err(Error::InvalidState(format!(
            "unphysical state at t = {t}: min eigenvalue {:e}, trace error {:e}",
            d.min_eigenvalue, d.trace_error
        )));
    }
    Ok(())
}

pub fn evolve_constant(l: &Superoperator, rho0: &DensityMatrix, grid: &[f64], method: Method) -> Result<Trajectory> {
    evolve_constant_with(l, rho0, grid, EvolveOptions::method(method))
}

pub fn evolve_constant_with(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: &[f64],
    opts: EvolveOptions,
) -> Result<Trajectory> {
    if l.n() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: l.n(), got: rho0.dim() });
    }
    rk4::check_grid(grid)?;
    let v0 = vec(rho0.matrix());
    let mut traj = Trajectory::default();
    let record = |traj: &mut Trajectory, t: f64, v: &CVector| -> Result<()> {
        traj.push(t, unvec(v)?)?;
        if opts.abort_on_unphysical {
            check_physical(traj)?;
        }
        Ok(())
    };
    match opts.method {
        Method::Rk4 => {
            let m = l.matrix();
            rk4::integrate_with(|_, y| m * y, &v0, grid, opts.rk4, |k, y| record(&mut traj, grid[k], y))?;
        }
        Method::Expm => {
            record(&mut traj, 0.0, &v0)?;
            let mut v = v0;
            let mut prop: Option<Propagator> = None;
            for w in grid.windows(2) {
                let dt = w[1] - w[0];
                // Equal spacings up to rounding share one propagator.
                let reuse = prop.as_ref().is_some_and(|p| (p.dt - dt).abs() <= 1e-12 * dt);
                if !reuse {
                    prop = Some(Propagator::new(l, dt)?);
                }
                v = prop.as_ref().unwrap().apply(&v);
                record(&mut traj, w[1], &v)?;
            }
        }
    }
    Ok(traj)
}

/// rho^t(t): at each grid time build `L^t` and propagate rho0 over [0, t].
pub fn adaptive_cg_evolve(
    h: &CMatrix,
    couplings: &CouplingOperators,
    bath: &Bath,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> Result<Trajectory> {
    if h.nrows() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: rho0.dim() });
    }
    rk4::check_grid(grid)?;
    let v0 = vec(rho0.matrix());
    let mut traj = Trajectory::default();
    for &t in grid {
        let v = if t == 0.0 { v0.clone() } else { expm_apply(&cg_generator(h, couplings, bath, t)?, t, &v0)? };
        traj.push(t, unvec(&v)?)?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinsys::{pauli, Axis};

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let mut m = CMatrix::identity(2, 2) * C64::from(0.5);
        m[(0, 1)] = C64::from(0.6);
        m[(1, 0)] = C64::from(0.6);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
        assert!(DensityMatrix::new(DensityMatrix::uniform_pure(4).into_matrix()).is_ok());
    }

    #[test]
    fn gibbs_of_qubit() {
        let h = pauli(Axis::Z) * C64::from(-0.5);
        let g = DensityMatrix::gibbs(&h, 2.0).unwrap();
        let p0 = 1.0 / (1.0 + (-2.0f64).exp());
        assert!((g.matrix()[(0, 0)].re - p0).abs() < 1e-14);
        let cold = DensityMatrix::gibbs(&h, f64::INFINITY).unwrap();
        assert!((cold.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert_eq!(cold, DensityMatrix::ground(&h).unwrap());
    }

    #[test]
    fn unitary_evolution_keeps_spectrum() {
        let h = pauli(Axis::X) + pauli(Axis::Z) * C64::from(0.3);
        let l = Superoperator::hamiltonian(&h);
        let mut rho = CMatrix::zeros(2, 2);
        rho[(0, 0)] = C64::from(0.8);
        rho[(1, 1)] = C64::from(0.2);
        let rho0 = DensityMatrix::new(rho).unwrap();
        let grid = uniform_grid(10.0, 21).unwrap();
        let a = evolve_constant(&l, &rho0, &grid, Method::Rk4).unwrap();
        let b = evolve_constant(&l, &rho0, &grid, Method::Expm).unwrap();
        for k in 0..grid.len() {
            assert!((a.diagnostics[k].eigenvalues[0] - 0.8).abs() < 1e-8);
            assert!((b.diagnostics[k].eigenvalues[0] - 0.8).abs() < 1e-12);
            assert!(crate::qmatrix::max_abs_diff(&a.states[k], &b.states[k]) < 1e-7);
        }
    }

    #[test]
    fn trajectory_requires_increasing_times() {
        let mut t = Trajectory::default();
        t.push(0.0, DensityMatrix::uniform_pure(2).into_matrix()).unwrap();
        assert!(t.push(0.0, DensityMatrix::uniform_pure(2).into_matrix()).is_err());
    }
}
