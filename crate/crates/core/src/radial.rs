//! Radial profiles `Q(r)` and the quadrature rules used on them.
//!
//! Radial grids are graded: geometric spacing `Δr = ratio·r` from `r0`
//! until that spacing reaches `h`, then uniform spacing `h`. On the
//! geometric part the weight `r^{N-1-b}` is smooth on the scale of each
//! cell, so composite Simpson keeps fourth order up to the origin; the
//! interval `[0, r0]` is integrated from the series expansion of `Q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Real;

/// Graded abscissae from `r0` to at least `r_max`.
pub fn graded_grid<T: Real>(r0: T, h: T, ratio: T, r_max: T) -> Vec<T> {
    assert!(r0 > T::zero() && h > T::zero() && ratio > T::zero() && r_max > r0);
    let mut r = vec![r0];
    let mut cur = r0;
    while cur * ratio < h {
        cur = cur * (T::one() + ratio);
        r.push(cur);
    }
    let start = cur;
    let mut k = 1usize;
    loop {
        let next = start + T::from_usize_exact(k) * h;
        r.push(next);
        if next >= r_max {
            break;
        }
        k += 1;
    }
    r
}

/// Composite Simpson rule on arbitrary increasing abscissae.
///
/// Pairs of cells use the quadratic through three points; an odd trailing
/// cell integrates the quadratic through the last three points over that
/// cell only.
pub fn simpson<T: Real>(x: &[T], f: &[T]) -> T {
    assert_eq!(x.len(), f.len());
    let n = x.len();
    if n < 2 {
        return T::zero();
    }
    if n == 2 {
        return (x[1] - x[0]) * (f[0] + f[1]) / T::lit(2.0);
    }
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    let mut acc = T::zero();
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        acc = acc
            + hs / six
                * ((two - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (two - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        // last cell [x_{n-2}, x_{n-1}] from the quadratic through the last three points
        let (a, b, c) = (x[n - 3], x[n - 2], x[n - 1]);
        let h0 = b - a;
        let h1 = c - b;
        let w2 = h1 * (two * h1 + T::lit(3.0) * h0) / (six * (h0 + h1));
        let w1 = h1 * (h1 + T::lit(3.0) * h0) / (six * h0);
        let w0 = -h1 * h1 * h1 / (six * h0 * (h0 + h1));
        acc = acc + w0 * f[n - 3] + w1 * f[n - 2] + w2 * f[n - 1];
    }
    acc
}

/// Finite-difference weights for derivatives `0..=order` at `z` from the
/// nodes `x` (Fornberg's recursion). Returns `w[k][j]`.
pub fn fd_weights<T: Real>(z: T, x: &[T], order: usize) -> Vec<Vec<T>> {
    let n = x.len();
    let mut c = vec![vec![T::zero(); n]; order + 1];
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (T::from_usize_exact(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - T::from_usize_exact(k) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Five-point (one-sided near the ends) derivative of order `order` at every node.
pub fn fd_derivative<T: Real>(x: &[T], f: &[T], order: usize) -> Vec<T> {
    let n = x.len();
    assert!(n >= 5, "need at least five samples");
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let w = fd_weights(x[i], &x[lo..lo + 5], order);
            w[order]
                .iter()
                .zip(&f[lo..lo + 5])
                .fold(T::zero(), |acc, (&wi, &fi)| acc + wi * fi)
        })
        .collect()
}

/// Leading terms of the regular expansion of the ground-state equation at
/// the origin: `Q ≈ α + α r²/(2N) + c1 r^{2-b}` with
/// `c1 = -λ α^{2σ+1} / ((2-b)(N-b))`.
#[derive(Debug, Clone, Copy)]
pub struct OriginSeries<T> {
    pub alpha: T,
    pub a2: T,
    pub c1: T,
    pub n: T,
    pub b: T,
    pub sigma: T,
}

impl<T: Real> OriginSeries<T> {
    pub fn new(params: &ModelParams<T>, alpha: T) -> Self {
        let n = params.dim();
        let b = params.b;
        let two = T::lit(2.0);
        let c1 = -params.coupling * alpha.powf(two * params.sigma + T::one()) / ((two - b) * (n - b));
        Self {
            alpha,
            a2: alpha / (two * n),
            c1,
            n,
            b,
            sigma: params.sigma,
        }
    }

    pub fn value(&self, r: T) -> T {
        self.alpha + self.a2 * r * r + self.c1 * r.powf(T::lit(2.0) - self.b)
    }

    pub fn slope(&self, r: T) -> T {
        let two = T::lit(2.0);
        two * self.a2 * r + self.c1 * (two - self.b) * r.powf(T::one() - self.b)
    }

    /// Size of the first neglected term relative to `α`, `~ (c1 r^{2-b})² (2σ+1)/α²`.
    pub fn truncation(&self, r: T) -> T {
        let t = self.c1 * r.powf(T::lit(2.0) - self.b) / self.alpha;
        (T::lit(2.0) * self.sigma + T::one()) * t * t
    }

    /// `∫_0^{r0} r^{N-1} Q² dr` (without the sphere factor).
    pub fn head_mass(&self, r0: T) -> T {
        let (n, b, two) = (self.n, self.b, T::lit(2.0));
        self.alpha * self.alpha * r0.powf(n) / n
            + two * self.alpha * self.c1 * r0.powf(n + two - b) / (n + two - b)
            + two * self.alpha * self.a2 * r0.powf(n + two) / (n + two)
    }

    /// `∫_0^{r0} r^{N-1} Q'² dr`.
    pub fn head_grad(&self, r0: T) -> T {
        let (n, b, two) = (self.n, self.b, T::lit(2.0));
        let e1 = n + two - two * b;
        let g = self.c1 * (two - b);
        g * g * r0.powf(e1) / e1
            + T::lit(4.0) * g * self.a2 * r0.powf(n + two - b) / (n + two - b)
            + T::lit(4.0) * self.a2 * self.a2 * r0.powf(n + two) / (n + two)
    }

    /// `∫_0^{r0} r^{N-1-b} |Q|^{2σ+2} dr`.
    pub fn head_potential(&self, r0: T) -> T {
        let (n, b, two) = (self.n, self.b, T::lit(2.0));
        let p = two * self.sigma + two;
        let base = self.alpha.abs().powf(p);
        let e1 = n + two - two * b;
        base * (r0.powf(n - b) / (n - b)
            + p * (self.c1 / self.alpha) * r0.powf(e1) / e1
            + p * (self.a2 / self.alpha) * r0.powf(n + two - b) / (n + two - b))
    }
}

/// Samples of a radial ground-state candidate on a graded grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile<T> {
    pub params: ModelParams<T>,
    pub r: Vec<T>,
    pub q: Vec<T>,
    /// `Q'(r)` at the same abscissae.
    pub dq: Vec<T>,
    /// Shooting value `Q(0)`.
    pub alpha: T,
    /// Largest relative Pohozaev residual (`NaN` until certified).
    pub residual: T,
}

impl<T: Real> RadialProfile<T> {
    /// Profile from samples only: `Q'` by five-point differences, `α`
    /// extrapolated from the series at `r0`.
    pub fn from_samples(params: ModelParams<T>, r: Vec<T>, q: Vec<T>) -> Result<Self> {
        let dq = {
            check_abscissae(&r, &q)?;
            fd_derivative(&r, &q, 1)
        };
        Self::from_parts(params, r, q, dq)
    }

    /// Profile from samples and derivative samples.
    pub fn from_parts(params: ModelParams<T>, r: Vec<T>, q: Vec<T>, dq: Vec<T>) -> Result<Self> {
        check_abscissae(&r, &q)?;
        if dq.len() != r.len() {
            return Err(Error::InvalidArgument("derivative length mismatch".into()));
        }
        let alpha = estimate_alpha(&params, r[0], q[0]);
        Ok(Self {
            params,
            r,
            q,
            dq,
            alpha,
            residual: T::nan(),
        })
    }

    pub fn r0(&self) -> T {
        self.r[0]
    }

    fn series(&self) -> OriginSeries<T> {
        OriginSeries::new(&self.params, self.alpha)
    }

    /// `||Q||² = ω_{N-1} ∫ Q² r^{N-1} dr`.
    pub fn l2_sq(&self) -> T {
        let n1 = self.params.dim() - T::one();
        let f: Vec<T> = self
            .r
            .iter()
            .zip(&self.q)
            .map(|(&r, &q)| q * q * r.powf(n1))
            .collect();
        self.params.sphere_area() * (simpson(&self.r, &f) + self.series().head_mass(self.r0()))
    }

    /// `||∇Q||² = ω_{N-1} ∫ Q'² r^{N-1} dr`.
    pub fn grad_sq(&self) -> T {
        let n1 = self.params.dim() - T::one();
        let f: Vec<T> = self
            .r
            .iter()
            .zip(&self.dq)
            .map(|(&r, &d)| d * d * r.powf(n1))
            .collect();
        self.params.sphere_area() * (simpson(&self.r, &f) + self.series().head_grad(self.r0()))
    }

    /// `I(Q) = ω_{N-1} ∫ r^{N-1-b} |Q|^{2σ+2} dr` for the given model.
    pub fn potential(&self, params: &ModelParams<T>) -> T {
        let p = T::lit(2.0) * params.sigma + T::lit(2.0);
        let w = params.dim() - T::one() - params.b;
        let f: Vec<T> = self
            .r
            .iter()
            .zip(&self.q)
            .map(|(&r, &q)| r.powf(w) * q.abs().powf(p))
            .collect();
        let head = OriginSeries::new(params, self.alpha).head_potential(self.r0());
        params.sphere_area() * (simpson(&self.r, &f) + head)
    }

    /// `Q(r)` by monotone cubic (Fritsch–Carlson) interpolation; the
    /// origin series below `r0`, zero beyond the last sample.
    pub fn eval(&self, r: T) -> T {
        let n = self.r.len();
        if r <= self.r[0] {
            let s = self.series();
            return self.q[0] + (s.value(r) - s.value(self.r[0]));
        }
        if r >= self.r[n - 1] {
            return if r == self.r[n - 1] { self.q[n - 1] } else { T::zero() };
        }
        let j = match self.r.binary_search_by(|x| x.partial_cmp(&r).expect("finite abscissa")) {
            Ok(j) => return self.q[j],
            Err(j) => j - 1,
        };
        let (x0, x1) = (self.r[j], self.r[j + 1]);
        let (y0, y1) = (self.q[j], self.q[j + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.pchip_slope(j), self.pchip_slope(j + 1));
        let t = (r - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
    }

    fn pchip_slope(&self, i: usize) -> T {
        let n = self.r.len();
        let delta = |k: usize| (self.q[k + 1] - self.q[k]) / (self.r[k + 1] - self.r[k]);
        if i == 0 {
            return delta(0);
        }
        if i == n - 1 {
            return delta(n - 2);
        }
        let (d0, d1) = (delta(i - 1), delta(i));
        if d0 * d1 <= T::zero() {
            return T::zero();
        }
        let h0 = self.r[i] - self.r[i - 1];
        let h1 = self.r[i + 1] - self.r[i];
        let w1 = T::lit(2.0) * h1 + h0;
        let w2 = h1 + T::lit(2.0) * h0;
        (w1 + w2) / (w1 / d0 + w2 / d1)
    }

    /// `γ·Q`, uncertified.
    pub fn scaled(&self, gamma: T) -> Self {
        Self {
            params: self.params,
            r: self.r.clone(),
            q: self.q.iter().map(|&q| gamma * q).collect(),
            dq: self.dq.iter().map(|&d| gamma * d).collect(),
            alpha: gamma * self.alpha,
            residual: T::nan(),
        }
    }

    /// Last radius where `|Q| > threshold`.
    pub fn support_radius(&self, threshold: T) -> T {
        self.r
            .iter()
            .zip(&self.q)
            .rev()
            .find(|(_, q)| q.abs() > threshold)
            .map(|(&r, _)| r)
            .unwrap_or(self.r[0])
    }
}

fn check_abscissae<T: Real>(r: &[T], q: &[T]) -> Result<()> {
    if r.len() != q.len() {
        return Err(Error::InvalidArgument("r and Q lengths differ".into()));
    }
    if r.len() < 5 {
        return Err(Error::InvalidArgument("profile needs at least five samples".into()));
    }
    if !(r[0] > T::zero()) {
        return Err(Error::InvalidArgument("profile abscissae must start at r0 > 0".into()));
    }
    if r.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("profile abscissae must increase strictly".into()));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { at: f64::NAN });
    }
    Ok(())
}

/// Solves `q0 = α + (series correction at r0)` for α by fixed-point iteration.
fn estimate_alpha<T: Real>(params: &ModelParams<T>, r0: T, q0: T) -> T {
    let mut alpha = q0;
    for _ in 0..50 {
        let s = OriginSeries::new(params, alpha);
        let next = q0 - (s.value(r0) - alpha);
        if (next - alpha).abs() <= T::epsilon() * alpha.abs() {
            return next;
        }
        alpha = next;
    }
    alpha
}
