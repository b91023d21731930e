//! Model parameters `(N, sigma, b)` and the scaling quantities derived from them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parameters of `i u_t + Δu + λ |x|^{-b} |u|^{2σ} u = 0` on `R^N`.
///
/// `λ` (the coupling) is 1 for the physical model. Setting it to 0 decouples
/// the nonlinearity, which the tests use to compare against free evolution.
/// `b = 0` is admitted so that classical NLS closed forms can serve as
/// oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub n: usize,
    pub sigma: T,
    pub b: T,
    pub coupling: T,
    s_sigma: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(n: usize, sigma: T, b: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension N must be >= 1".into()));
        }
        if !(sigma.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams("sigma and b must be finite".into()));
        }
        if sigma <= T::zero() {
            return Err(Error::InvalidParams(format!("sigma = {sigma} must be > 0")));
        }
        let nn = T::from_usize_exact(n);
        let b_cap = nn.min(T::lit(2.0));
        if b < T::zero() || b >= b_cap {
            return Err(Error::InvalidParams(format!(
                "b = {b} violates 0 <= b < min(2, N) = {b_cap}"
            )));
        }
        if let Some(cap) = energy_critical_sigma(n, b) {
            if sigma >= cap {
                return Err(Error::InvalidParams(format!(
                    "sigma = {sigma} must be below the energy-critical power {cap}"
                )));
            }
        }
        Ok(Self {
            n,
            sigma,
            b,
            coupling: T::one(),
            s_sigma: s_sigma_of(n, sigma, b),
        })
    }

    /// Same parameters with the nonlinearity multiplied by `coupling`.
    pub fn with_coupling(mut self, coupling: T) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn dim(&self) -> T {
        T::from_usize_exact(self.n)
    }

    pub fn s_sigma(&self) -> T {
        self.s_sigma
    }

    /// `(2 - b) / N`, the mass-critical power.
    pub fn critical_sigma(&self) -> T {
        (T::lit(2.0) - self.b) / self.dim()
    }

    /// `(2 - b) / (N - 2)` for `N >= 3`, `None` (infinite) otherwise.
    pub fn energy_critical_sigma(&self) -> Option<T> {
        energy_critical_sigma(self.n, self.b)
    }

    pub fn supercritical(&self) -> bool {
        self.s_sigma > T::zero()
    }

    /// `sigma` equals `(2 - b)/N` up to a few ulps.
    pub fn is_mass_critical(&self) -> bool {
        let c = self.critical_sigma();
        (self.sigma - c).abs() <= T::lit(64.0) * T::epsilon() * c.abs().max(T::one())
    }

    /// `N sigma + b`, the homogeneity degree of the gradient in the
    /// Gagliardo–Nirenberg estimate.
    pub fn nsb(&self) -> T {
        self.dim() * self.sigma + self.b
    }

    /// `2 sigma + 2 - (N sigma + b)`, the power of `||u||` in the same estimate.
    pub fn l2_power(&self) -> T {
        T::lit(2.0) * self.sigma + T::lit(2.0) - self.nsb()
    }

    /// `(2 - b)/(2 sigma)`: amplitude exponent of the scaling `u_λ`.
    pub fn scaling_exponent(&self) -> T {
        (T::lit(2.0) - self.b) / (T::lit(2.0) * self.sigma)
    }

    /// Area of the unit sphere `S^{N-1}`: `2 π^{N/2} / Γ(N/2)`.
    pub fn sphere_area(&self) -> T {
        sphere_area(self.n)
    }
}

/// `s_σ = N/2 - (2 - b)/(2σ)`.
pub fn critical_index<T: Real>(params: &ModelParams<T>) -> T {
    params.s_sigma()
}

fn s_sigma_of<T: Real>(n: usize, sigma: T, b: T) -> T {
    T::from_usize_exact(n) / T::lit(2.0) - (T::lit(2.0) - b) / (T::lit(2.0) * sigma)
}

fn energy_critical_sigma<T: Real>(n: usize, b: T) -> Option<T> {
    (n >= 3).then(|| (T::lit(2.0) - b) / T::from_usize_exact(n - 2))
}

/// `Γ(n/2)` by the half-integer recurrence from `Γ(1/2) = √π`, `Γ(1) = 1`.
pub fn gamma_half<T: Real>(n: usize) -> T {
    assert!(n >= 1, "Γ(n/2) needs n >= 1");
    let (mut g, mut k) = if n.is_multiple_of(2) {
        (T::one(), 2)
    } else {
        (T::PI().sqrt(), 1)
    };
    while k < n {
        // Γ(x + 1) = x Γ(x) with x = k/2
        g = g * T::from_usize_exact(k) / T::lit(2.0);
        k += 2;
    }
    g
}

pub fn sphere_area<T: Real>(n: usize) -> T {
    T::lit(2.0) * T::PI().powf(T::from_usize_exact(n) / T::lit(2.0)) / gamma_half::<T>(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn critical_index_examples() {
        let p = ModelParams::new(3, 1.0, 0.0).unwrap();
        assert_relative_eq!(critical_index(&p), 0.5, epsilon = 1e-15);
        let p = ModelParams::new(2, 1.0, 0.5).unwrap();
        assert_relative_eq!(critical_index(&p), 0.25, epsilon = 1e-15);
        for (n, b) in [(1usize, 0.3), (2, 1.2), (3, 1.9)] {
            let sigma = (2.0 - b) / n as f64;
            let p = ModelParams::new(n, sigma, b).unwrap();
            assert!(critical_index(&p).abs() < 1e-15);
            assert!(p.is_mass_critical());
            assert!(!p.supercritical());
        }
    }

    #[test]
    fn works_in_single_precision() {
        let p = ModelParams::<f32>::new(3, 1.0, 0.0).unwrap();
        assert!((critical_index(&p) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(ModelParams::new(3, 1.0, 2.5).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2, 1.0, -0.1).is_err());
        assert!(ModelParams::new(3, 2.0, 0.0).is_err());
        assert!(ModelParams::new(3, 1.9, 0.0).is_ok());
        assert!(ModelParams::new(2, 50.0, 1.5).is_ok());
        assert!(ModelParams::new(0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn gamma_and_sphere_area() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(gamma_half::<f64>(1), pi.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(gamma_half::<f64>(2), 1.0);
        assert_relative_eq!(gamma_half::<f64>(3), pi.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(gamma_half::<f64>(6), 2.0);
        assert_relative_eq!(sphere_area::<f64>(1), 2.0, epsilon = 1e-15);
        assert_relative_eq!(sphere_area::<f64>(2), 2.0 * pi, epsilon = 1e-14);
        assert_relative_eq!(sphere_area::<f64>(3), 4.0 * pi, epsilon = 1e-14);
        assert_relative_eq!(sphere_area::<f64>(4), 2.0 * pi * pi, epsilon = 1e-14);
    }

    #[test]
    fn critical_index_monotone_in_sigma_and_b() {
        // s_σ = N/2 - (2-b)/(2σ) grows with both σ and b
        let mut prev = f64::NEG_INFINITY;
        for k in 1..50 {
            let p = ModelParams::new(3, 0.02 * k as f64, 0.5).unwrap();
            assert!(critical_index(&p) > prev);
            prev = critical_index(&p);
        }
        let mut prev = f64::NEG_INFINITY;
        for k in 0..19 {
            let p = ModelParams::new(2, 1.0, 0.1 * k as f64).unwrap();
            assert!(critical_index(&p) > prev);
            prev = critical_index(&p);
        }
    }
}
