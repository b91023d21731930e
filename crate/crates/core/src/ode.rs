//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options<T> {
    pub rtol: T,
    pub atol: T,
    /// Steps below `min_step_rel · max(|x|, span)` raise `StepUnderflow`.
    pub min_step_rel: T,
}

impl<T: Real> Default for Dopri5Options<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-30),
            min_step_rel: T::lit(1e-12),
        }
    }
}

/// Embedded 5(4) pair; the 5th-order solution is propagated.
#[derive(Debug, Clone)]
pub struct Dopri5<T> {
    pub opts: Dopri5Options<T>,
    h_prev: Option<T>,
    pub steps: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights equal the last row of A; E = b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl<T: Real> Dopri5<T> {
    pub fn new(opts: Dopri5Options<T>) -> Self {
        Self {
            opts,
            h_prev: None,
            steps: 0,
            rejected: 0,
        }
    }

    /// Advances `y` from `x0` to `x1` (either direction).
    pub fn integrate<const D: usize, F>(&mut self, f: &F, x0: T, mut y: [T; D], x1: T) -> Result<[T; D]>
    where
        F: Fn(T, &[T; D]) -> [T; D],
    {
        let span = x1 - x0;
        if span == T::zero() {
            return Ok(y);
        }
        let dir = span.signum();
        let len = span.abs();
        let mut x = x0;
        let mut h = self.h_prev.unwrap_or(len).min(len);
        let mut k1 = f(x, &y);
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= T::zero() {
                break;
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let floor = self.opts.min_step_rel * x.abs().max(len);
            if h < floor {
                return Err(Error::StepUnderflow {
                    r: x.to_f64_lossy(),
                    step: h.to_f64_lossy(),
                });
            }
            let (y_new, err, k7) = self.trial(f, x, &y, &k1, dir * h);
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h <= floor * T::lit(10.0) {
                    return Err(Error::NonFinite { at: x.to_f64_lossy() });
                }
                h = h * T::lit(0.1);
                self.rejected += 1;
                continue;
            }
            if err <= T::one() {
                x = if last { x1 } else { x + dir * h };
                y = y_new;
                k1 = k7;
                self.steps += 1;
                let grow = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
                };
                if !last {
                    h = h * grow;
                } else {
                    self.h_prev = Some((h * grow).max(h));
                }
            } else {
                self.rejected += 1;
                h = h * (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
            }
        }
        Ok(y)
    }

    fn trial<const D: usize, F>(&self, f: &F, x: T, y: &[T; D], k1: &[T; D], h: T) -> ([T; D], T, [T; D])
    where
        F: Fn(T, &[T; D]) -> [T; D],
    {
        let mut k = [[T::zero(); D]; 7];
        k[0] = *k1;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = T::lit(A[s][j]);
                if a != T::zero() {
                    for i in 0..D {
                        ys[i] = ys[i] + h * a * kj[i];
                    }
                }
            }
            k[s] = f(x + T::lit(C[s]) * h, &ys);
            if s == 6 {
                // FSAL: stage 7 is evaluated at the 5th-order solution
                let mut err = T::zero();
                for i in 0..D {
                    let mut e = T::zero();
                    for (j, kj) in k.iter().enumerate() {
                        e = e + T::lit(E[j]) * kj[i];
                    }
                    let e = h * e;
                    let scale = self.opts.atol + self.opts.rtol * y[i].abs().max(ys[i].abs());
                    err = err + (e / scale) * (e / scale);
                }
                let err = (err / T::from_usize_exact(D)).sqrt();
                return (ys, err, k[6]);
            }
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_over_many_periods() {
        let mut ode = Dopri5::new(Dopri5Options {
            rtol: 1e-11,
            atol: 1e-14,
            ..Default::default()
        });
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let t = 20.0 * std::f64::consts::PI;
        let y = ode.integrate(&f, 0.0, [1.0, 0.0], t).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
    }

    #[test]
    fn chained_intervals_and_backward_direction() {
        let mut ode = Dopri5::new(Dopri5Options::default());
        let f = |_x: f64, y: &[f64; 1]| [y[0]];
        let mut y = [1.0];
        for k in 0..10 {
            y = ode.integrate(&f, 0.1 * k as f64, y, 0.1 * (k + 1) as f64).unwrap();
        }
        assert!((y[0] - 1f64.exp()).abs() < 1e-9);
        let back = ode.integrate(&f, 1.0, y, 0.0).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singular_coefficient_near_origin() {
        // y'' + (2/r) y' = 0 has y' = -1/r²: from r=1e-6 the step shrinks with r but succeeds
        let f = |r: f64, y: &[f64; 2]| [y[1], -2.0 / r * y[1]];
        let mut ode = Dopri5::new(Dopri5Options::default());
        let r0 = 1e-6;
        let y = ode.integrate(&f, r0, [1.0 / r0, -1.0 / (r0 * r0)], 1.0).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-6, "{y:?}");
    }
}
