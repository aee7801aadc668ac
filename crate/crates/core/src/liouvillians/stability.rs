use super::bm_generator;
use crate::bath::{Bath, BathSpec};
use crate::error::{Error, Result};
use crate::qmatrix::{CMatrix, CVector, C64};
use crate::spinsys::{pauli, Axis, CouplingOperators};

/// BM stability of the qubit H = (1 - sigma_z)/2 coupled through sigma_x.
#[derive(Debug, Clone)]
pub struct BmStability {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// Analytic spectrum: populations {0, -2 lambda^2 A}, then the coherence pair.
    pub eigenvalues: Vec<C64>,
    /// Spectrum of the assembled generator, sorted like `general_eigenvalues`.
    pub numeric_eigenvalues: Vec<C64>,
    pub lambda_crit: f64,
    /// Threshold located by bisection on the numeric spectrum.
    pub numeric_lambda_crit: f64,
}

fn qubit() -> (CMatrix, CouplingOperators) {
    let h = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::from(0.0), C64::from(1.0)]));
    (h, CouplingOperators { sigma_r: pauli(Axis::X), sigma_i: CMatrix::zeros(2, 2) })
}

pub(crate) fn with_lambda(spec: &BathSpec, lambda: f64) -> BathSpec {
    BathSpec { lambda, ..*spec }
}

fn max_growth(bath: &Bath) -> Result<f64> {
    let (h, c) = qubit();
    let l = bm_generator(&h, &c, bath)?;
    Ok(l.eigenvalues()?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Analytic spectrum of the BM generator for given A, B and lambda.
pub fn bm_qubit_eigenvalues(a: f64, b: f64, lambda: f64) -> Vec<C64> {
    let l2 = lambda * lambda;
    let disc = C64::from(-1.0 + 2.0 * b * l2 + a * a * l2 * l2).sqrt();
    vec![C64::from(0.0), C64::from(-2.0 * l2 * a), -l2 * a + disc, -l2 * a - disc]
}

pub fn bm_stability(bath: &Bath) -> Result<BmStability> {
    let spec = bath.spec();
    // A and B come from Gamma = (gamma + sigma)/2 of the single sigma_x channel.
    let unit = Bath::new(with_lambda(spec, 1.0))?;
    let gamma =
        |w: f64| -> Result<C64> { Ok(0.5 * (unit.gamma_parts(w)?.scalar + unit.sigma_parts(w, false)?.scalar)) };
    let (gp, gm) = (gamma(1.0)?, gamma(-1.0)?);
    let a = (gp + gm).re;
    let b = (gm - gp).im;
    if b <= 0.0 {
        return Err(Error::BNotPositive(b));
    }
    let lambda = bath.lambda();
    let lambda_crit = (2.0 * b).powf(-0.5);
    let (h, c) = qubit();
    let numeric_eigenvalues = bm_generator(&h, &c, bath)?.eigenvalues()?;

    // Bisection on the largest real part; the trace eigenvalue sits at 0.
    let unstable = |lam: f64| -> Result<bool> {
        let b = Bath::new(with_lambda(spec, lam))?;
        Ok(max_growth(&b)? > 1e-13)
    };
    let mut lo = 0.5 * lambda_crit;
    while unstable(lo)? {
        lo *= 0.5;
        if lo < 1e-8 {
            return Err(Error::NumericOverflow("no stable coupling found".into()));
        }
    }
    let mut hi = 2.0 * lambda_crit;
    while !unstable(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NumericOverflow("no unstable coupling found".into()));
        }
    }
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if unstable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    Ok(BmStability {
        a,
        b,
        lambda,
        eigenvalues: bm_qubit_eigenvalues(a, b, lambda),
        numeric_eigenvalues,
        lambda_crit,
        numeric_lambda_crit: 0.5 * (lo + hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_limit() {
        let ev = bm_qubit_eigenvalues(0.7, 0.4, 0.0);
        let mut im: Vec<f64> = ev.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        assert_eq!(im, vec![-1.0, 0.0, 0.0, 1.0]);
        assert!(ev.iter().all(|z| z.re == 0.0));
    }

    #[test]
    fn drude_has_no_instability() {
        // Drude: B = Im{Gamma(-1) - Gamma(1)} = -tau_b/(1+tau_b^2) < 0.
        let bath = Bath::new(BathSpec::drude(0.5, 1.0, 0.1)).unwrap();
        match bm_stability(&bath) {
            Err(Error::BNotPositive(b)) => assert!((b + 0.5 / 1.25).abs() < 1e-13),
            other => panic!("{other:?}"),
        }
    }
}
