use std::f64::consts::PI;

use super::{Bath, Component};
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Envelope level below which the integrand is dropped.
const TRUNCATION: f64 = 1e-12;
const MAX_PANELS: f64 = 4.0e6;

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Closed form for a constant kernel k: k (2 pi / tau) sinc((a - b) tau / 2).
pub fn sinc_pair_constant(k: f64, a: f64, b: f64, tau: f64) -> f64 {
    k * 2.0 * PI / tau * sinc((a - b) * tau / 2.0)
}

fn envelope_bound(bath: &Bath, c: Component, w: f64, a: f64, b: f64, tau: f64) -> Result<f64> {
    let d = ((w + a) * (w + b)).abs();
    Ok(bath.envelope(c, w)? * (2.0 / tau).powi(2) / d)
}

/// Distance beyond `edge` (in direction `dir`) after which the envelope
/// bound stays below the truncation level.
fn truncation_distance(bath: &Bath, c: Component, edge: f64, dir: f64, a: f64, b: f64, tau: f64) -> Result<f64> {
    let panel = PI / tau;
    let mut lo = 0.0;
    let mut hi = panel;
    while envelope_bound(bath, c, edge + dir * hi, a, b, tau)? >= TRUNCATION {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::QuadratureFailure { value: f64::NAN, error: f64::INFINITY, intervals: 0 });
        }
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if mid <= panel {
            break;
        }
        if envelope_bound(bath, c, edge + dir * mid, a, b, tau)? >= TRUNCATION {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < panel {
            break;
        }
    }
    Ok(hi)
}

/// int K(w) sinc((w+a)tau/2) sinc((w+b)tau/2) dw for a real component K.
///
/// Panels of width pi/tau are aligned with the zeros of the first sinc and
/// the range is cut where the envelope bound drops below 1e-12. Beyond the
/// cut the product of sines averages to cos((a-b)tau/2)/2, which gives the
/// analytic tail term added at the end.
pub(crate) fn sinc_pair(bath: &Bath, c: Component, a: f64, b: f64, tau: f64) -> Result<f64> {
    bath.component_fast(c, 0.5)?;
    let kernel = |w: f64| bath.component_fast(c, w).unwrap_or(0.0);
    let panel = PI / tau;
    let lo0 = (-a).min(-b);
    let hi0 = (-a).max(-b);
    let right = hi0 + truncation_distance(bath, c, hi0, 1.0, a, b, tau)?;
    let left = lo0 - truncation_distance(bath, c, lo0, -1.0, a, b, tau)?;

    let k_lo = ((left + a) / panel).floor();
    let k_hi = ((right + a) / panel).ceil();
    if k_hi - k_lo > MAX_PANELS {
        return Err(Error::QuadratureFailure {
            value: f64::NAN,
            error: f64::INFINITY,
            intervals: (k_hi - k_lo) as usize,
        });
    }
    let mut pts: Vec<f64> = (k_lo as i64..=k_hi as i64).map(|k| -a + k as f64 * panel).collect();
    let (left, right) = (pts[0], *pts.last().unwrap());
    if left < 0.0 && right > 0.0 {
        pts.push(0.0);
    }

    let peak = kernel(-a).abs().max(kernel(-b).abs()).max(bath.envelope(c, a.abs().max(b.abs()))?);
    let scale = 2.0 * PI / tau * peak.max(1e-300);
    let tol = Tolerance::new(1e-14 * scale, 1e-11).intervals(100_000);
    let body =
        quad::integrate_points(|w| kernel(w) * sinc((w + a) * tau / 2.0) * sinc((w + b) * tau / 2.0), &pts, tol)?;

    let c0 = (0.5 * (a - b) * tau).cos();
    let tail_tol = Tolerance::new(1e-16 * scale, 1e-10);
    let fs = bath.feature_scale().max(right - hi0);
    let rt = quad::integrate_to_infinity_scaled(|w| kernel(w) / ((w + a) * (w + b)), right, fs, tail_tol)?;
    let fs = bath.feature_scale().max(lo0 - left);
    let lt = quad::integrate_to_infinity_scaled(|v| kernel(-v) / ((a - v) * (b - v)), -left, fs, tail_tol)?;
    let tail = 2.0 * c0 / (tau * tau) * (rt.value + lt.value);
    Ok(body.value + tail)
}
