//! Classical RK4 with step-doubling error control and local Richardson
//! extrapolation.

use crate::error::{Error, Result};
use crate::qmatrix::CVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4Options {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 1e-7 }
    }
}

fn step<F: FnMut(f64, &CVector) -> CVector>(f: &mut F, t: f64, y: &CVector, h: f64) -> CVector {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + k1.scale(0.5 * h)));
    let k3 = f(t + 0.5 * h, &(y + k2.scale(0.5 * h)));
    let k4 = f(t + h, &(y + k3.scale(h)));
    y + (k1 + (k2 + k3).scale(2.0) + k4).scale(h / 6.0)
}

/// Integrates y' = f(t, y) from `grid[0]` and returns y at every grid point.
pub fn integrate<F>(f: F, y0: &CVector, grid: &[f64], opts: Rk4Options) -> Result<Vec<CVector>>
where
    F: FnMut(f64, &CVector) -> CVector,
{
    let mut out = Vec::with_capacity(grid.len());
    integrate_with(f, y0, grid, opts, |_, y| {
        out.push(y.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Like [`integrate`], handing each grid point to `visit` as it is reached;
/// an error from `visit` stops the integration.
pub fn integrate_with<F, V>(mut f: F, y0: &CVector, grid: &[f64], opts: Rk4Options, mut visit: V) -> Result<()>
where
    F: FnMut(f64, &CVector) -> CVector,
    V: FnMut(usize, &CVector) -> Result<()>,
{
    check_grid(grid)?;
    visit(0, y0)?;
    if grid.len() == 1 {
        return Ok(());
    }
    let spacing = grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut h = (1e-3f64).min(spacing / 10.0);
    let span = grid[grid.len() - 1] - grid[0];
    let mut t = grid[0];
    let mut y = y0.clone();
    for (k, &target) in grid.iter().enumerate().skip(1) {
        while t < target {
            let last = target - t <= h * (1.0 + 1e-12);
            let hs = if last { target - t } else { h };
            let full = step(&mut f, t, &y, hs);
            let half = step(&mut f, t, &y, 0.5 * hs);
            let two = step(&mut f, t + 0.5 * hs, &half, 0.5 * hs);
            // Error per unit time, so the tolerances bound the accumulated error over the grid.
            let share = (hs / span).min(1.0);
            let mut err = 0.0f64;
            for i in 0..y.len() {
                let d = (two[i] - full[i]).norm() / 15.0;
                let scale = opts.abs_tol + opts.rel_tol * y[i].norm().max(two[i].norm());
                err = err.max(d / (scale * share));
            }
            if !err.is_finite() {
                return Err(Error::NumericOverflow(format!("non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                y = &two + (&two - &full).unscale(15.0);
                t = if last { target } else { t + hs };
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A clipped final step says nothing about the natural step size.
            if !(last && err <= 1.0 && factor > 1.0) {
                h = hs * factor;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
        visit(k, &y)?;
    }
    Ok(())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty time grid".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidSpec(format!("time grid must start at 0, got {}", grid[0])));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidSpec("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::C64;

    #[test]
    fn harmonic_oscillator() {
        // y = (x, v), x'' = -x.
        let y0 = CVector::from_vec(vec![C64::from(1.0), C64::from(0.0)]);
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let ys = integrate(|_, y| CVector::from_vec(vec![y[1], -y[0]]), &y0, &grid, Rk4Options::default()).unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0].re - t.cos()).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let y0 = CVector::from_vec(vec![C64::from(1.0)]);
        let f = |_: f64, y: &CVector| y.clone();
        assert!(integrate(f, &y0, &[0.0, 1.0, 1.0], Rk4Options::default()).is_err());
        assert!(integrate(f, &y0, &[0.5, 1.0], Rk4Options::default()).is_err());
    }

    #[test]
    fn underflow_is_reported() {
        // y' = y^3 blows up at t = 0.5.
        let y0 = CVector::from_vec(vec![C64::from(1.0)]);
        let r = integrate(|_, y| y.map(|z| z * z * z), &y0, &[0.0, 1.0], Rk4Options::default());
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. }) | Err(Error::NumericOverflow(_))), "{r:?}");
    }
}
