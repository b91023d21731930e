//! N-dimensional FFTs and spectral derivatives on periodic grids.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlannerScalar};

use crate::grid::GridSpec;
use crate::scalar::Real;

/// Precomputed transforms for one grid.
///
/// Forward transforms are unnormalised; [`Spectral::inverse`] divides by
/// `M^N`, so `inverse(forward(u)) == u` up to roundoff.
pub struct Spectral<T: Real> {
    grid: GridSpec<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    line: Vec<Complex<T>>,
    k_sq: Vec<T>,
    k_axis: Vec<T>,
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: GridSpec<T>) -> Self {
        let mut planner = FftPlannerScalar::new();
        let fwd = planner.plan_fft_forward(grid.points);
        let inv = planner.plan_fft_inverse(grid.points);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            grid,
            fwd,
            inv,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            line: vec![Complex::new(T::zero(), T::zero()); grid.points],
            k_sq: grid.wavenumber_sq(),
            k_axis: grid.wavenumbers(),
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// `|ξ|^2` per bin in FFT order.
    pub fn k_sq(&self) -> &[T] {
        &self.k_sq
    }

    pub fn forward(&mut self, data: &mut [Complex<T>]) {
        let plan = Arc::clone(&self.fwd);
        self.transform(&*plan, data);
    }

    pub fn inverse(&mut self, data: &mut [Complex<T>]) {
        let plan = Arc::clone(&self.inv);
        self.transform(&*plan, data);
        let norm = T::one() / T::from_usize_exact(data.len());
        for z in data.iter_mut() {
            *z = *z * norm;
        }
    }

    fn transform(&mut self, plan: &dyn Fft<T>, data: &mut [Complex<T>]) {
        let m = self.grid.points;
        let n = self.grid.n;
        debug_assert_eq!(data.len(), self.grid.len());
        // last axis: contiguous lines
        plan.process_with_scratch(data, &mut self.scratch);
        // remaining axes: gather strided lines
        for axis in (0..n.saturating_sub(1)).rev() {
            let stride = m.pow((n - 1 - axis) as u32);
            let block = stride * m;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (j, slot) in self.line.iter_mut().enumerate() {
                        *slot = data[start + j * stride];
                    }
                    plan.process_with_scratch(&mut self.line, &mut self.scratch);
                    for (j, z) in self.line.iter().enumerate() {
                        data[start + j * stride] = *z;
                    }
                }
            }
        }
    }

    /// `Σ_ξ w(ξ) |û(ξ)|^2 h^N / M^N`, the Parseval-weighted spectral sum.
    fn weighted_sum(&self, hat: &[Complex<T>], weight: impl Fn(usize) -> T) -> T {
        let scale = self.grid.cell_volume() / T::from_usize_exact(hat.len());
        hat.iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, z)| acc + weight(i) * z.norm_sqr())
            * scale
    }

    /// `||∇u||^2` by spectral differentiation.
    pub fn grad_sq(&mut self, values: &[Complex<T>]) -> T {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        self.grad_sq_of_hat(&hat)
    }

    pub fn grad_sq_of_hat(&self, hat: &[Complex<T>]) -> T {
        self.weighted_sum(hat, |i| self.k_sq[i])
    }

    /// Squared homogeneous Sobolev norm `Σ_{ξ≠0} |ξ|^{2s} |û|^2`.
    pub fn hs_norm_sq(&mut self, values: &[Complex<T>], s: T) -> T {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        self.weighted_sum(&hat, |i| {
            let k2 = self.k_sq[i];
            if k2 == T::zero() {
                T::zero()
            } else {
                k2.powf(s)
            }
        })
    }

    /// Fraction of spectral mass in bins where some `|k_j|` exceeds two
    /// thirds of the Nyquist index.
    pub fn tail_fraction_of_hat(&self, hat: &[Complex<T>]) -> T {
        let m = self.grid.points;
        let cut = (m / 2) * 2 / 3;
        let mut idx = vec![0usize; self.grid.n];
        let mut total = T::zero();
        let mut tail = T::zero();
        for (i, z) in hat.iter().enumerate() {
            let e = z.norm_sqr();
            total = total + e;
            self.grid.unravel(i, &mut idx);
            let high = idx.iter().any(|&k| {
                let signed = if k < m / 2 { k } else { m - k };
                signed > cut
            });
            if high {
                tail = tail + e;
            }
        }
        if total == T::zero() {
            T::zero()
        } else {
            tail / total
        }
    }

    /// `∂u/∂x_axis`, with the unpaired Nyquist mode zeroed.
    pub fn derivative_from_hat(&mut self, hat: &[Complex<T>], axis: usize) -> Vec<Complex<T>> {
        let m = self.grid.points;
        let mut idx = vec![0usize; self.grid.n];
        let mut d: Vec<Complex<T>> = hat
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                self.grid.unravel(i, &mut idx);
                let k = idx[axis];
                if k == m / 2 {
                    Complex::new(T::zero(), T::zero())
                } else {
                    z * Complex::new(T::zero(), self.k_axis[k])
                }
            })
            .collect();
        self.inverse(&mut d);
        d
    }
}
