//! Non-Markovian Born equation for H = (1 - sigma_z)/2 coupled through a
//! single Pauli operator to a bath with C(t) = exp(-|t|/tau_b) / (2 tau_b).
//!
//! With eta_bar the anti-Hermitian memory operator the Born equation becomes
//! the closed linear system
//!   rho'     = (i/2)[sigma_z, rho] + lambda^2 [eta_bar, sigma_a]
//!   eta_bar' = (i/2)[sigma_z, eta_bar] - eta_bar/tau_b + [sigma_a, rho]/(2 tau_b)
//! which is integrated in the real parameterization
//!   rho = [[r00, rx + i ry], [rx - i ry, 1 - r00]],
//!   eta_bar = [[i e00, ex + i ey], [-ex + i ey, -i e00]].

use super::rk4::{self, Rk4Options};
use super::{DensityMatrix, Trajectory};
use crate::error::{Error, Result};
use crate::qmatrix::{CMatrix, CVector, Superoperator, C64, I};
use crate::spinsys::{pauli, Axis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BornAxis {
    /// Dissipative coupling sigma_x.
    X,
    /// Pure dephasing, coupling sigma_z.
    Z,
}

fn qubit_hamiltonian() -> CMatrix {
    (CMatrix::identity(2, 2) - pauli(Axis::Z)) * C64::from(0.5)
}

fn check_qubit(rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho0.dim() });
    }
    Ok(())
}

pub fn born_exponential_solver(
    axis: BornAxis,
    tau_b: f64,
    lambda: f64,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> Result<Trajectory> {
    check_qubit(rho0)?;
    if !(tau_b > 0.0 && tau_b.is_finite()) {
        return Err(Error::InvalidSpec(format!("tau_b must be positive and finite, got {tau_b}")));
    }
    let r = rho0.matrix();
    let l2 = lambda * lambda;
    let inv = 1.0 / tau_b;
    let opts = Rk4Options::default();
    let mut traj = Trajectory::default();
    match axis {
        BornAxis::Z => {
            // (rho01, eta_bar01); populations are constants of motion.
            let y0 = CVector::from_vec(vec![r[(0, 1)], C64::default()]);
            let f = |_: f64, y: &CVector| {
                CVector::from_vec(vec![I * y[0] - 2.0 * l2 * y[1], y[0] * inv + (I - inv) * y[1]])
            };
            for (t, y) in grid.iter().zip(rk4::integrate(f, &y0, grid, opts)?) {
                let mut m = r.clone();
                m[(0, 1)] = y[0];
                m[(1, 0)] = y[0].conj();
                traj.push(*t, m)?;
            }
        }
        BornAxis::X => {
            // Two 3x3 blocks: (r00, ex, ey) with a constant drive, and (rx, ry, e00).
            let y0 = CVector::from_vec(
                [r[(0, 0)].re, 0.0, 0.0, r[(0, 1)].re, r[(0, 1)].im, 0.0].iter().map(|&v| C64::from(v)).collect(),
            );
            let f = |_: f64, y: &CVector| {
                let (r00, ex, ey, rx, ry, e00) = (y[0], y[1], y[2], y[3], y[4], y[5]);
                CVector::from_vec(vec![
                    2.0 * l2 * ex,
                    -inv * r00 - inv * ex - ey + 0.5 * inv,
                    ex - inv * ey,
                    -ry,
                    rx + 2.0 * l2 * e00,
                    -inv * ry - inv * e00,
                ])
            };
            for (t, y) in grid.iter().zip(rk4::integrate(f, &y0, grid, opts)?) {
                let (r00, rx, ry) = (y[0].re, y[3].re, y[4].re);
                let m = CMatrix::from_row_slice(
                    2,
                    2,
                    &[C64::from(r00), C64::new(rx, ry), C64::new(rx, -ry), C64::from(1.0 - r00)],
                );
                traj.push(*t, m)?;
            }
        }
    }
    Ok(traj)
}

/// rho01(t) of the pure-dephasing Born solution:
/// rho01(0) e^{it} e^{-t/2tau_b} [cosh(k t/2tau_b) + sinh(k t/2tau_b)/k], k = sqrt(1 - 8 lambda^2 tau_b).
pub fn born_dephasing_closed_form(tau_b: f64, lambda: f64, rho01: C64, t: f64) -> C64 {
    let k = C64::from(1.0 - 8.0 * lambda * lambda * tau_b).sqrt();
    let x = t / (2.0 * tau_b);
    let shape = if k.norm() < 1e-6 {
        let kx2 = (k * x) * (k * x);
        C64::from(1.0) + kx2 / 2.0 + x * (1.0 + kx2 / 6.0)
    } else {
        (k * x).cosh() + (k * x).sinh() / k
    };
    rho01 * (I * t).exp() * (-x).exp() * shape
}

/// Closed-form BM generators of the exponential-memory qubit.
///
/// Axis z: (i/2)[sigma_z, rho] + lambda^2 (sigma_z rho sigma_z - rho), independent of tau_b.
/// Axis x: (i/2)[sigma_z, rho] + (lambda^2/2) g [[sigma_x, rho], sigma_x]
///         - (lambda^2/2) s [[sigma_y, rho], sigma_x], g = 1/(1+tau_b^2), s = tau_b g.
pub fn markov_limit_qubit(axis: BornAxis, tau_b: f64, lambda: f64) -> Result<Superoperator> {
    if !(tau_b >= 0.0 && tau_b.is_finite()) {
        return Err(Error::InvalidSpec(format!("tau_b must be finite and >= 0, got {tau_b}")));
    }
    let l2 = lambda * lambda;
    let mut l = Superoperator::hamiltonian(&qubit_hamiltonian());
    match axis {
        BornAxis::Z => {
            let z = pauli(Axis::Z);
            l.add_sandwich(C64::from(l2), &z, &z);
            l.add_left(C64::from(-l2), &CMatrix::identity(2, 2));
        }
        BornAxis::X => {
            let (x, y) = (pauli(Axis::X), pauli(Axis::Y));
            let g = 1.0 / (1.0 + tau_b * tau_b);
            let s = tau_b * g;
            // [[a, rho], x] = a rho x - rho a x - x a rho + x rho a.
            let mut add_double = |c: f64, a: &CMatrix| {
                let c = C64::from(c);
                l.add_sandwich(c, a, &x);
                l.add_right(-c, &(a * &x));
                l.add_left(-c, &(&x * a));
                l.add_sandwich(c, &x, a);
            };
            add_double(0.5 * l2 * g, &x);
            add_double(-0.5 * l2 * s, &y);
        }
    }
    Ok(l)
}
