use super::{matmul, CMatrix, CVector, Superoperator, C64};
use crate::error::{Error, Result};

// Higham (2005) degree-13 Pade coefficients and the matching 1-norm bound.
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if !finite(a) {
        return Err(Error::NumericOverflow("expm input".into()));
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(0.5f64.powi(s));

    let id = CMatrix::identity(n, n);
    let a2 = matmul(&a, &a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let b = |k: usize| C64::from(B13[k]);

    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = matmul(&a6, &inner_u) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = matmul(&a, &u);
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = matmul(&a6, &inner_v) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or_else(|| Error::NumericOverflow("singular Pade denominator".into()))?;
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    if !finite(&r) {
        return Err(Error::NumericOverflow("matrix exponential".into()));
    }
    Ok(r)
}

/// e^{L t} v.
pub fn expm_apply(l: &Superoperator, t: f64, v: &CVector) -> Result<CVector> {
    if v.len() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: v.len() });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidSpec(format!("propagation time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let e = expm(&(l.matrix() * C64::from(t)))?;
    let out = &e * v;
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericOverflow("expm_apply".into()));
    }
    Ok(out)
}

/// Fixed step propagator e^{L dt}, computed once and applied repeatedly.
#[derive(Debug, Clone)]
pub struct Propagator {
    step: CMatrix,
    pub dt: f64,
}

impl Propagator {
    pub fn new(l: &Superoperator, dt: f64) -> Result<Self> {
        Ok(Self { step: expm(&(l.matrix() * C64::from(dt)))?, dt })
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.step * v
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.step
    }
}
