use std::f64::consts::PI;

use crate::bath::{Bath, Component};
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

const TOL: Tolerance = Tolerance::new(1e-16, 1e-11);
const MAX_PERIODS: f64 = 400_000.0;

/// Exponent of the exact pure-dephasing solution rho01(t) = e^{-Gamma(t)} rho01(0):
/// Gamma(t) = (4 lambda^2/pi) int_0^inf (gamma(w) + gamma(-w)) sin^2(wt/2)/w^2 dw,
/// with gamma the even transform of the first bath channel.
pub fn exact_dephasing(bath: &Bath, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidSpec(format!("time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let kernel =
        |w: f64| bath.gamma_unchecked(Component::GammaEven, w) + bath.gamma_unchecked(Component::GammaEven, -w);
    let f = |w: f64| {
        let s = (0.5 * w * t).sin();
        kernel(w) * s * s / (w * w)
    };
    let scale = bath.feature_scale();
    let period = 2.0 * PI / t;

    // Integrate whole periods of sin^2 up to W, then add the mean of the tail,
    // K/(2 w^2); the remaining oscillation is bounded by K(W)/(W^2 t).
    let mut edges = vec![0.0];
    let mut upper = 0.0;
    let mut head = 0.0;
    let mut target = 8.0 * scale;
    loop {
        let periods = (target / period).ceil();
        if periods > MAX_PERIODS {
            return Err(Error::QuadratureFailure { value: head, error: f64::INFINITY, intervals: periods as usize });
        }
        let w_end = periods * period;
        edges.clear();
        edges.push(upper);
        let first = (upper / period).round() as usize;
        for k in first + 1..=periods as usize {
            edges.push(k as f64 * period);
        }
        // Resolve the kernel's own structure below one period.
        if upper == 0.0 {
            for &b in &[0.01 * scale, 0.1 * scale, scale] {
                if b < edges[1] {
                    edges.push(b);
                }
            }
            edges.sort_by(f64::total_cmp);
        }
        if edges.len() > 1 {
            head += quad::integrate_points(f, &edges, TOL.intervals(4 * edges.len() + 4000))?.value;
        }
        upper = w_end;
        let tail = 0.5 * quad::integrate_to_infinity_scaled(|w| kernel(w) / (w * w), upper, scale, TOL)?.value;
        let bound = 2.0 * kernel(upper) / (upper * upper * t);
        let total = head + tail;
        if !total.is_finite() {
            return Err(Error::DivergentIntegral(format!("dephasing integral is not finite at t = {t}")));
        }
        if bound <= 1e-12 * total.abs() {
            return Ok(4.0 * bath.lambda().powi(2) / PI * total);
        }
        target = 2.0 * upper;
    }
}

/// Gamma(t) for the exponential-memory bath, gamma(w) = 1/(1 + w^2 tau_b^2):
/// 2 lambda^2 (t - tau_b (1 - e^{-t/tau_b})).
pub fn drude_dephasing(tau_b: f64, lambda: f64, t: f64) -> f64 {
    let memory = if tau_b == 0.0 { 0.0 } else { -tau_b * (-t / tau_b).exp_m1() };
    2.0 * lambda * lambda * (t - memory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathSpec;

    #[test]
    fn drude_closed_form() {
        for &tau_b in &[0.3, 1.0, 4.0] {
            let bath = Bath::new(BathSpec::drude(tau_b, 1.0, 0.1)).unwrap();
            for &t in &[0.1, 1.0, 5.0, 30.0] {
                let num = exact_dephasing(&bath, t).unwrap();
                let exact = drude_dephasing(tau_b, 0.1, t);
                assert!((num - exact).abs() <= 1e-9 * exact, "tau_b {tau_b} t {t}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn short_memory_limit() {
        let bath = Bath::new(BathSpec::drude(1e-3, 1.0, 0.1)).unwrap();
        let g = exact_dephasing(&bath, 1.0).unwrap();
        assert!((g / (2.0 * 0.01) - 1.0).abs() < 0.01);
        assert_eq!(exact_dephasing(&bath, 0.0).unwrap(), 0.0);
    }
}
