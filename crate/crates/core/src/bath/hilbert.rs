use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

const PV_TOL: Tolerance = Tolerance::new(1e-12, 1e-11).intervals(4000);

/// (1/pi) P int h(x) / (w - x) dx, folded onto u = |x - w| so the pole is
/// excised symmetrically: (1/pi) int_0^inf (h(w-u) - h(w+u)) / u du.
///
/// `scale` is the decay length of `h`; kinks of `h` at `x = 0` are handled
/// by a breakpoint at `u = |w|`.
pub fn pv_hilbert<F: Fn(f64) -> f64>(h: F, w: f64, scale: f64) -> Result<f64> {
    let g = |u: f64| (h(w - u) - h(w + u)) / u;
    let x = w.abs();
    let mut total = 0.0;
    if x > 0.0 {
        let pts: Vec<f64> = (0..=8).map(|k| x * k as f64 / 8.0).collect();
        total += quad::integrate_points(g, &pts, PV_TOL)?.value;
    }
    total += quad::integrate_to_infinity_scaled(g, x, scale, PV_TOL)?.value;
    if !total.is_finite() {
        return Err(Error::QuadratureFailure { value: total, error: f64::INFINITY, intervals: 0 });
    }
    Ok(total / PI)
}

#[derive(Debug, Clone)]
struct Side {
    x: Vec<f64>,
    r: Vec<f64>,
    sup: Vec<f64>,
    // Newton form of the cubic on each interval: stencil nodes then coefficients.
    newton: Vec<[f64; 7]>,
    bucket: Vec<u32>,
    bucket_width: f64,
}

impl Side {
    fn new(x: Vec<f64>, r: Vec<f64>, sup: Vec<f64>) -> Self {
        let n = x.len();
        let mut newton = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let k = i.saturating_sub(1).min(n.saturating_sub(4));
            let xs = [x[k], x[k + 1], x[k + 2], x[k + 3]];
            let mut d = [r[k], r[k + 1], r[k + 2], r[k + 3]];
            for level in 1..4 {
                for j in (level..4).rev() {
                    d[j] = (d[j] - d[j - 1]) / (xs[j] - xs[j - level]);
                }
            }
            newton.push([xs[0], xs[1], xs[2], d[0], d[1], d[2], d[3]]);
        }
        let limit = x[n - 1];
        let count = 4 * n;
        let bucket_width = limit / count as f64;
        let mut bucket = Vec::with_capacity(count + 1);
        let mut i = 0usize;
        for b in 0..=count {
            let left = b as f64 * bucket_width;
            while i + 2 < n && x[i + 1] <= left {
                i += 1;
            }
            bucket.push(i as u32);
        }
        Self { x, r, sup, newton, bucket, bucket_width }
    }

    fn fast(&self, t: f64) -> f64 {
        let n = self.x.len();
        let b = ((t / self.bucket_width) as usize).min(self.bucket.len() - 1);
        let mut i = self.bucket[b] as usize;
        while i + 2 < n && self.x[i + 1] <= t {
            i += 1;
        }
        let c = &self.newton[i];
        let (u0, u1, u2) = (t - c[0], t - c[1], t - c[2]);
        c[3] + u0 * (c[4] + u1 * (c[5] + u2 * c[6]))
    }

    fn locate(&self, x: f64) -> usize {
        match self.x.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    fn interp(x: &[f64], r: &[f64], t: f64) -> f64 {
        let n = x.len();
        let i = match x.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => return r[i],
            Err(i) => i.saturating_sub(1),
        };
        let k = i.saturating_sub(1).min(n.saturating_sub(4));
        let m = 4.min(n);
        let mut acc = 0.0;
        for p in k..k + m {
            let mut w = 1.0;
            for q in k..k + m {
                if q != p {
                    w *= (t - x[q]) / (x[p] - x[q]);
                }
            }
            acc += w * r[p];
        }
        acc
    }
}

/// Hilbert transform of a real kernel on an adaptive grid, with a
/// logarithmic term `(jump/pi) ln|w|` split off when the kernel jumps at 0,
/// and a moment expansion beyond the support.
#[derive(Debug, Clone)]
pub struct HilbertTable {
    sides: [Side; 2],
    log_coeff: f64,
    limit: f64,
    moments: Vec<f64>,
}

/// Target for the mid-point interpolation error.
const TABLE_TOL: f64 = 1e-7;
const EPS0: f64 = 1e-9;
const MAX_NODES: usize = 200_000;

impl HilbertTable {
    pub fn build<F: Fn(f64) -> f64>(h: F, jump: f64, limit: f64, scale: f64) -> Result<Self> {
        let log_coeff = jump / PI;
        let mut sides = Vec::with_capacity(2);
        for sign in [1.0, -1.0] {
            let value = |x: f64| -> Result<f64> { Ok(pv_hilbert(&h, sign * x, scale)? - log_coeff * x.ln()) };
            let mut xs = Vec::new();
            let mut x = EPS0;
            let knee = 0.01 * scale;
            while x < knee {
                xs.push(x);
                x *= 10f64.powf(0.25);
            }
            let step = scale / 4.0;
            let mut x = knee;
            while x < limit {
                xs.push(x);
                x += step;
            }
            xs.push(limit);
            let mut rs = xs.iter().map(|&x| value(x)).collect::<Result<Vec<f64>>>()?;
            // Intervals whose mid-point test already passed are not retested.
            let mut open = vec![true; xs.len() - 1];
            loop {
                let mut nx = Vec::with_capacity(xs.len() * 2);
                let mut nr = Vec::with_capacity(xs.len() * 2);
                let mut nopen = Vec::with_capacity(xs.len() * 2);
                let mut inserted = 0;
                for i in 0..xs.len() - 1 {
                    nx.push(xs[i]);
                    nr.push(rs[i]);
                    let mid = 0.5 * (xs[i] + xs[i + 1]);
                    if !open[i] || mid <= xs[i] || mid >= xs[i + 1] {
                        nopen.push(false);
                        continue;
                    }
                    let exact = value(mid)?;
                    if (exact - Side::interp(&xs, &rs, mid)).abs() > TABLE_TOL {
                        nx.push(mid);
                        nr.push(exact);
                        nopen.push(true);
                        nopen.push(true);
                        inserted += 1;
                    } else {
                        nopen.push(false);
                    }
                }
                nx.push(*xs.last().unwrap());
                nr.push(*rs.last().unwrap());
                xs = nx;
                rs = nr;
                open = nopen;
                if inserted == 0 {
                    break;
                }
                if xs.len() > MAX_NODES {
                    return Err(Error::QuadratureFailure { value: 0.0, error: TABLE_TOL, intervals: xs.len() });
                }
            }
            let mut sup = vec![0.0; xs.len()];
            let mut run = 0.0f64;
            for i in (0..xs.len()).rev() {
                run = run.max((rs[i] + log_coeff * xs[i].ln()).abs());
                sup[i] = run;
            }
            sides.push(Side::new(xs, rs, sup));
        }
        let tol = Tolerance::new(1e-14, 1e-13).intervals(4000);
        let moments = (0..13)
            .map(|k| {
                quad::integrate_points(|x| x.powi(k) * h(x), &[-limit, -0.5 * limit, 0.0, 0.5 * limit, limit], tol)
                    .map(|e| e.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        let neg = sides.pop().unwrap();
        let pos = sides.pop().unwrap();
        Ok(Self { sides: [pos, neg], log_coeff, limit, moments })
    }

    fn series(&self, w: f64) -> f64 {
        let mut acc = 0.0;
        let mut p = 1.0;
        for m in &self.moments {
            acc += m * p;
            p /= w;
        }
        acc / (PI * w)
    }

    fn tail_bound(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut p = 1.0;
        for m in &self.moments {
            acc += m.abs() * p;
            p /= x;
        }
        acc / (PI * x)
    }

    pub fn eval(&self, w: f64) -> f64 {
        let x = w.abs();
        if x > self.limit {
            return self.series(w);
        }
        let side = &self.sides[if w >= 0.0 { 0 } else { 1 }];
        let r = if x <= EPS0 { side.r[0] } else { side.fast(x) };
        r + self.log_coeff * x.ln()
    }

    /// Non-increasing bound on |H h(v)| for |v| >= |w|.
    pub fn envelope(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= self.limit {
            return self.tail_bound(x);
        }
        let mut m = self.tail_bound(self.limit);
        for side in &self.sides {
            let i = side.locate(x);
            m = m.max(side.sup[i]);
        }
        m
    }

    pub fn nodes(&self) -> usize {
        self.sides[0].x.len() + self.sides[1].x.len()
    }
}
