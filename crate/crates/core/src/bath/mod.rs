//! Bosonic baths: spectral densities, the Fourier matrices gamma (even),
//! sigma (odd) and Gamma (half-sided), correlation functions and the
//! sinc-pair integrals that feed the coarse-grained generator.
//!
//! Two-channel (Ohmic) matrices decompose as
//! `gamma = G_e * 1 + G_o * sigma_y` and `sigma = i (S_e * 1 + S_o * sigma_y)`
//! where `S = H[G]` is the Hilbert transform
//! `H h(w) = (1/pi) P int h(x) / (w - x) dx`.

mod hilbert;
mod sinc;

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use hilbert::{pv_hilbert, HilbertTable};
pub use sinc::{sinc, sinc_pair_constant};

use crate::error::{Error, Result};
use crate::qmatrix::{CMatrix, C64, I};
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BathModel {
    /// g(w) = (w/omega_ph)^s exp(-w/omega_ct), two channels.
    OhmicExp { s: f64, omega_ph: f64, omega_ct: f64 },
    /// Single channel with C(t) = exp(-|t|/tau_b) / (2 tau_b).
    DrudeExp { tau_b: f64 },
}

/// `beta` may be `f64::INFINITY` (zero temperature) for the Ohmic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub model: BathModel,
    pub beta: f64,
    pub lambda: f64,
}

impl BathSpec {
    pub fn ohmic(s: f64, omega_ph: f64, omega_ct: f64, beta: f64, lambda: f64) -> Self {
        Self { model: BathModel::OhmicExp { s, omega_ph, omega_ct }, beta, lambda }
    }

    pub fn drude(tau_b: f64, beta: f64, lambda: f64) -> Self {
        Self { model: BathModel::DrudeExp { tau_b }, beta, lambda }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.beta > 0.0) {
            return bad("beta must be positive");
        }
        match self.model {
            BathModel::OhmicExp { s, omega_ph, omega_ct } => {
                if !(s > 0.0 && s.is_finite()) {
                    return bad("Ohmic exponent s must be positive");
                }
                if !(omega_ph > 0.0 && omega_ph.is_finite() && omega_ct > 0.0 && omega_ct.is_finite()) {
                    return bad("omega_ph and omega_ct must be positive");
                }
            }
            BathModel::DrudeExp { tau_b } => {
                if !(tau_b >= 0.0 && tau_b.is_finite()) {
                    return bad("tau_b must be finite and non-negative");
                }
                if !self.beta.is_finite() {
                    return bad("zero temperature is only available for the Ohmic model");
                }
            }
        }
        Ok(())
    }

    /// Number of bath operator channels (2 for Ohmic, 1 for Drude).
    pub fn channels(&self) -> usize {
        match self.model {
            BathModel::OhmicExp { .. } => 2,
            BathModel::DrudeExp { .. } => 1,
        }
    }
}

/// Real scalar functions from which every Fourier matrix is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    GammaEven,
    GammaOdd,
    SigmaEven,
    SigmaOdd,
}

impl Component {
    pub fn is_gamma(self) -> bool {
        matches!(self, Component::GammaEven | Component::GammaOdd)
    }
}

/// `scalar * 1 + odd * sigma_y` in channel space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPair {
    pub scalar: C64,
    pub odd: C64,
}

impl ChannelPair {
    pub fn matrix(&self, channels: usize) -> CMatrix {
        if channels == 1 {
            return CMatrix::from_element(1, 1, self.scalar);
        }
        CMatrix::from_row_slice(2, 2, &[self.scalar, -I * self.odd, I * self.odd, self.scalar])
    }

    /// Entry (a, b) of [`Self::matrix`].
    pub fn entry(&self, a: usize, b: usize) -> C64 {
        match (a, b) {
            (0, 0) | (1, 1) => self.scalar,
            (0, 1) => -I * self.odd,
            _ => I * self.odd,
        }
    }
}

/// Which Fourier matrix a sinc-pair integral weighs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SincKernel {
    Gamma { a: usize, b: usize },
    Sigma { a: usize, b: usize },
}

#[derive(Debug)]
pub struct Bath {
    spec: BathSpec,
    tables: OnceLock<Result<[HilbertTable; 2]>>,
}

impl Clone for Bath {
    fn clone(&self) -> Self {
        let tables = OnceLock::new();
        if let Some(t) = self.tables.get() {
            let _ = tables.set(t.clone());
        }
        Self { spec: self.spec, tables }
    }
}

fn ohmic_f(s: f64, omega_ph: f64, omega_ct: f64, beta: f64, w: f64) -> Result<f64> {
    if w == 0.0 {
        if s < 1.0 {
            return Err(Error::DivergentLimit(format!("gamma(0) diverges for Ohmic exponent s = {s} < 1")));
        }
        if s == 1.0 && beta.is_finite() {
            return Ok(2.0 * PI / (beta * omega_ph));
        }
        return Ok(0.0);
    }
    let x = w.abs();
    let g = (x / omega_ph).powf(s) * (-x / omega_ct).exp();
    if !beta.is_finite() {
        return Ok(if w > 0.0 { 2.0 * PI * g } else { 0.0 });
    }
    let d = (-beta * w).exp_m1().abs();
    Ok(2.0 * PI * g / d)
}

impl Bath {
    pub fn new(spec: BathSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec, tables: OnceLock::new() })
    }

    pub fn spec(&self) -> &BathSpec {
        &self.spec
    }

    pub fn lambda(&self) -> f64 {
        self.spec.lambda
    }

    pub fn channels(&self) -> usize {
        self.spec.channels()
    }

    /// Frequency scale on which the kernels vary.
    pub fn feature_scale(&self) -> f64 {
        match self.spec.model {
            BathModel::OhmicExp { omega_ct, .. } => {
                if self.spec.beta.is_finite() {
                    omega_ct.min(1.0 / self.spec.beta)
                } else {
                    omega_ct
                }
            }
            BathModel::DrudeExp { tau_b } => {
                if tau_b > 0.0 {
                    1.0 / tau_b
                } else {
                    1.0
                }
            }
        }
    }

    /// The Ohmic g(w) or the Drude density (1/2pi) beta w / (1 + (w tau_b)^2).
    pub fn spectral_density(&self, w: f64) -> Result<f64> {
        if w < 0.0 {
            return Err(Error::NegativeFrequency(w));
        }
        Ok(match self.spec.model {
            BathModel::OhmicExp { s, omega_ph, omega_ct } => (w / omega_ph).powf(s) * (-w / omega_ct).exp(),
            BathModel::DrudeExp { tau_b } => self.spec.beta * w / (2.0 * PI * (1.0 + (w * tau_b).powi(2))),
        })
    }

    /// Exact value of a component. Sigma components of the Ohmic model are
    /// evaluated by principal-value quadrature.
    pub fn component(&self, c: Component, w: f64) -> Result<f64> {
        match (self.spec.model, c) {
            (BathModel::DrudeExp { tau_b }, Component::GammaEven) => Ok(1.0 / (1.0 + (w * tau_b).powi(2))),
            (BathModel::DrudeExp { tau_b }, Component::SigmaEven) => Ok(w * tau_b / (1.0 + (w * tau_b).powi(2))),
            (BathModel::DrudeExp { .. }, _) => Ok(0.0),
            (BathModel::OhmicExp { s, omega_ph, omega_ct }, Component::GammaEven) => {
                ohmic_f(s, omega_ph, omega_ct, self.spec.beta, w)
            }
            (BathModel::OhmicExp { s, omega_ph, omega_ct }, Component::GammaOdd) => {
                if w == 0.0 {
                    ohmic_f(s, omega_ph, omega_ct, self.spec.beta, w)?;
                    return Ok(0.0);
                }
                Ok(w.signum() * ohmic_f(s, omega_ph, omega_ct, self.spec.beta, w)?)
            }
            (BathModel::OhmicExp { .. }, Component::SigmaEven) => self.ohmic_hilbert(Component::GammaEven, w),
            (BathModel::OhmicExp { .. }, Component::SigmaOdd) => self.ohmic_hilbert(Component::GammaOdd, w),
        }
    }

    /// Closed-form gamma component, with the zero-frequency limit replaced by
    /// its neighbourhood value for exponents below one.
    pub(crate) fn gamma_unchecked(&self, c: Component, w: f64) -> f64 {
        match self.component(c, w) {
            Ok(v) => v,
            Err(_) => self.component(c, w + f64::MIN_POSITIVE.sqrt()).unwrap_or(0.0),
        }
    }

    fn ohmic_hilbert(&self, source: Component, w: f64) -> Result<f64> {
        let BathModel::OhmicExp { omega_ct, .. } = self.spec.model else { unreachable!() };
        let jump = self.jump_at_zero(source);
        if w == 0.0 && jump != 0.0 {
            return Err(Error::DivergentLimit("odd-channel sigma diverges logarithmically at zero frequency".into()));
        }
        pv_hilbert(|x| self.gamma_unchecked(source, x), w, omega_ct.min(self.feature_scale()).max(1e-3))
    }

    /// h(0+) - h(0-) for a gamma component.
    fn jump_at_zero(&self, c: Component) -> f64 {
        match c {
            Component::GammaOdd => {
                let f0 = match self.spec.model {
                    BathModel::OhmicExp { s, omega_ph, omega_ct } => {
                        ohmic_f(s, omega_ph, omega_ct, self.spec.beta, 0.0).unwrap_or(0.0)
                    }
                    _ => 0.0,
                };
                2.0 * f0
            }
            _ => 0.0,
        }
    }

    fn tables(&self) -> Result<&[HilbertTable; 2]> {
        let t = self.tables.get_or_init(|| {
            let BathModel::OhmicExp { s, omega_ph, omega_ct } = self.spec.model else {
                return Err(Error::InvalidSpec("Hilbert tables exist only for the Ohmic model".into()));
            };
            let beta = self.spec.beta;
            // Point where the density has dropped below 1e-16 of its peak.
            let peak = ohmic_f(s, omega_ph, omega_ct, beta, s * omega_ct).unwrap_or(1.0).max(1e-300);
            let mut limit = (s + 1.0) * omega_ct;
            while ohmic_f(s, omega_ph, omega_ct, beta, limit).unwrap_or(0.0) > 1e-16 * peak {
                limit *= 1.1;
            }
            let scale = self.feature_scale();
            let even = HilbertTable::build(|x| self.gamma_unchecked(Component::GammaEven, x), 0.0, limit, scale)?;
            let odd = HilbertTable::build(
                |x| self.gamma_unchecked(Component::GammaOdd, x),
                self.jump_at_zero(Component::GammaOdd),
                limit,
                scale,
            )?;
            Ok([even, odd])
        });
        t.as_ref().map_err(|e| e.clone())
    }

    /// Component value for dense sampling: closed forms, or the cached sigma
    /// table for the Ohmic model.
    pub fn component_fast(&self, c: Component, w: f64) -> Result<f64> {
        match (self.spec.model, c) {
            (BathModel::OhmicExp { .. }, Component::SigmaEven) => Ok(self.tables()?[0].eval(w)),
            (BathModel::OhmicExp { .. }, Component::SigmaOdd) => Ok(self.tables()?[1].eval(w)),
            _ => Ok(self.gamma_or_closed(c, w)),
        }
    }

    fn gamma_or_closed(&self, c: Component, w: f64) -> f64 {
        match (self.spec.model, c) {
            (BathModel::DrudeExp { .. }, _) => self.component(c, w).unwrap_or(0.0),
            _ => self.gamma_unchecked(c, w),
        }
    }

    /// Non-increasing bound on |component(x)| for |x| >= |w|.
    pub fn envelope(&self, c: Component, w: f64) -> Result<f64> {
        let x = w.abs();
        Ok(match (self.spec.model, c) {
            (BathModel::DrudeExp { tau_b }, Component::GammaEven) => 1.0 / (1.0 + (x * tau_b).powi(2)),
            (BathModel::DrudeExp { tau_b }, Component::SigmaEven) => {
                let y = if tau_b > 0.0 { x.max(1.0 / tau_b) } else { x };
                y * tau_b / (1.0 + (y * tau_b).powi(2))
            }
            (BathModel::DrudeExp { .. }, _) => 0.0,
            (BathModel::OhmicExp { s, omega_ph, omega_ct }, Component::GammaEven | Component::GammaOdd) => {
                let y = x.max(s * omega_ct);
                ohmic_f(s, omega_ph, omega_ct, self.spec.beta, y)?
            }
            (BathModel::OhmicExp { .. }, Component::SigmaEven) => self.tables()?[0].envelope(x),
            (BathModel::OhmicExp { .. }, Component::SigmaOdd) => self.tables()?[1].envelope(x),
        })
    }

    pub fn gamma_parts(&self, w: f64) -> Result<ChannelPair> {
        Ok(ChannelPair {
            scalar: C64::from(self.component(Component::GammaEven, w)?),
            odd: C64::from(self.component(Component::GammaOdd, w)?),
        })
    }

    /// Sigma decomposition. With `need_odd = false` the odd channel is not
    /// evaluated (it is reported as zero), which is how callers avoid the
    /// zero-frequency divergence when the odd channel cancels.
    pub fn sigma_parts(&self, w: f64, need_odd: bool) -> Result<ChannelPair> {
        let odd = if need_odd && self.channels() == 2 { self.component(Component::SigmaOdd, w)? } else { 0.0 };
        Ok(ChannelPair { scalar: I * self.component(Component::SigmaEven, w)?, odd: I * odd })
    }

    pub fn gamma_matrix(&self, w: f64) -> Result<CMatrix> {
        Ok(self.gamma_parts(w)?.matrix(self.channels()))
    }

    pub fn sigma_matrix(&self, w: f64) -> Result<CMatrix> {
        Ok(self.sigma_parts(w, true)?.matrix(self.channels()))
    }

    /// Gamma = (gamma + sigma) / 2.
    pub fn half_sided_gamma(&self, w: f64) -> Result<CMatrix> {
        Ok((self.gamma_matrix(w)? + self.sigma_matrix(w)?) * C64::from(0.5))
    }

    /// C(t) = (1/2pi) int gamma(w) exp(-i w t) dw.
    pub fn correlation_function(&self, t: f64) -> Result<CMatrix> {
        match self.spec.model {
            BathModel::DrudeExp { tau_b } => {
                if tau_b == 0.0 {
                    if t == 0.0 {
                        return Err(Error::DivergentLimit("white-noise correlation is a delta at t = 0".into()));
                    }
                    return Ok(CMatrix::zeros(1, 1));
                }
                Ok(CMatrix::from_element(1, 1, C64::from((-t.abs() / tau_b).exp() / (2.0 * tau_b))))
            }
            BathModel::OhmicExp { .. } => {
                let even = self.fourier_component(Component::GammaEven, t)?;
                let odd = self.fourier_component(Component::GammaOdd, t)?;
                Ok(ChannelPair { scalar: even, odd }.matrix(2))
            }
        }
    }

    fn fourier_component(&self, c: Component, t: f64) -> Result<C64> {
        let BathModel::OhmicExp { s, omega_ct, .. } = self.spec.model else { unreachable!() };
        let peak = self.envelope(c, 0.0)?.max(1e-300);
        let mut hi = (s + 1.0) * omega_ct;
        while self.envelope(c, hi)? > 1e-17 * peak {
            hi *= 1.1;
        }
        let lo = -hi;
        let mut pts = vec![lo, 0.0, hi];
        if t != 0.0 {
            let step = PI / t.abs();
            let count = ((hi - lo) / step).ceil().min(2e5) as i64;
            let step = (hi - lo) / count as f64;
            pts.extend((1..count).map(|k| lo + k as f64 * step));
        }
        let tol = Tolerance::new(1e-10, 1e-10).intervals(20000);
        let re = quad::integrate_points(|w| self.gamma_unchecked(c, w) * (w * t).cos(), &pts, tol)?;
        let im = quad::integrate_points(|w| -self.gamma_unchecked(c, w) * (w * t).sin(), &pts, tol)?;
        Ok(C64::new(re.value, im.value) / (2.0 * PI))
    }

    /// int K(w) sinc((w+a)t/2) sinc((w+b)t/2) dw for one matrix element.
    pub fn sinc_pair_integral(&self, kernel: SincKernel, a: f64, b: f64, tau: f64) -> Result<C64> {
        let (even, odd, i, j, sigma) = match kernel {
            SincKernel::Gamma { a, b } => (Component::GammaEven, Component::GammaOdd, a, b, false),
            SincKernel::Sigma { a, b } => (Component::SigmaEven, Component::SigmaOdd, a, b, true),
        };
        let ch = self.channels();
        if i >= ch || j >= ch {
            return Err(Error::DimensionMismatch { expected: ch, got: i.max(j) + 1 });
        }
        let ie = self.sinc_component(even, a, b, tau)?;
        let io = if ch == 2 && i != j { self.sinc_component(odd, a, b, tau)? } else { 0.0 };
        let pair = ChannelPair { scalar: C64::from(ie), odd: C64::from(io) };
        let v = if ch == 1 { pair.scalar } else { pair.entry(i, j) };
        Ok(if sigma { I * v } else { v })
    }

    /// Real sinc-pair integral of a single component.
    pub fn sinc_component(&self, c: Component, a: f64, b: f64, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::InvalidSpec(format!("sinc integral needs tau > 0, got {tau}")));
        }
        if let BathModel::DrudeExp { tau_b } = self.spec.model {
            match c {
                Component::GammaEven if tau_b == 0.0 => return Ok(sinc_pair_constant(1.0, a, b, tau)),
                Component::SigmaEven if tau_b == 0.0 => return Ok(0.0),
                Component::GammaOdd | Component::SigmaOdd => return Ok(0.0),
                _ => {}
            }
        }
        sinc::sinc_pair(self, c, a, b, tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Bath {
        Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, 1.0, 0.1)).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let b = fig1();
        assert_eq!(b.spectral_density(0.0).unwrap(), 0.0);
        assert!((b.spectral_density(1.0).unwrap() - (-0.2f64).exp()).abs() < 1e-15);
        assert!(matches!(b.spectral_density(-1.0), Err(Error::NegativeFrequency(_))));
        let d = Bath::new(BathSpec::drude(1.0, 1.0, 0.1)).unwrap();
        assert!((d.spectral_density(1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn zero_frequency_limits() {
        let b = fig1();
        assert!((b.gamma_matrix(0.0).unwrap()[(0, 0)].re - 2.0 * PI).abs() < 1e-14);
        let b2 = Bath::new(BathSpec::ohmic(2.0, 1.0, 5.0, 1.0, 0.1)).unwrap();
        assert_eq!(b2.gamma_matrix(0.0).unwrap()[(0, 0)].re, 0.0);
        let sub = Bath::new(BathSpec::ohmic(0.5, 1.0, 5.0, 1.0, 0.1)).unwrap();
        assert!(matches!(sub.gamma_matrix(0.0), Err(Error::DivergentLimit(_))));
        assert!(matches!(b.sigma_matrix(0.0), Err(Error::DivergentLimit(_))));
        assert!(b2.sigma_matrix(0.0).is_ok());
        // The limit is approached continuously.
        let near = b.gamma_matrix(1e-7).unwrap()[(0, 0)].re;
        assert!((near - 2.0 * PI).abs() < 1e-5);
    }

    #[test]
    fn drude_closed_forms() {
        let d = Bath::new(BathSpec::drude(1.0, 1.0, 0.1)).unwrap();
        assert_eq!(d.gamma_matrix(0.0).unwrap()[(0, 0)], C64::from(1.0));
        assert!((d.sigma_matrix(1.0).unwrap()[(0, 0)] - C64::new(0.0, 0.5)).norm() < 1e-15);
        let g = d.half_sided_gamma(1.0).unwrap()[(0, 0)];
        assert!((g - C64::new(0.25, 0.25)).norm() < 1e-15);
        assert!((g - 1.0 / (2.0 * (C64::from(1.0) - I))).norm() < 1e-15);
        assert!((d.half_sided_gamma(0.0).unwrap()[(0, 0)] - C64::from(0.5)).norm() < 1e-15);
        assert!((d.correlation_function(0.0).unwrap()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        assert!(Bath::new(BathSpec::drude(1.0, f64::INFINITY, 0.1)).is_err());
        assert!(Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, -1.0, 0.1)).is_err());
        assert!(Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, 1.0, -0.1)).is_err());
        assert!(Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, f64::INFINITY, 0.1)).is_ok());
    }

    #[test]
    fn zero_temperature_has_no_absorption() {
        let b = Bath::new(BathSpec::ohmic(1.0, 1.0, 5.0, f64::INFINITY, 0.1)).unwrap();
        assert_eq!(b.gamma_matrix(-0.5).unwrap()[(0, 0)].re, 0.0);
        assert!((b.gamma_matrix(0.5).unwrap()[(0, 0)].re - 2.0 * PI * 0.5 * (-0.1f64).exp()).abs() < 1e-14);
    }
}
