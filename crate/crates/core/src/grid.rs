//! Cell-centred periodic Cartesian grids on `[-L, L)^N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `M` points per axis at `x_k = -L + (k + 1/2) h`, `h = 2L/M`.
///
/// With `M` even no sample lands on the origin, so `|x|^{-b}` is finite
/// everywhere on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub n: usize,
    pub half_width: T,
    pub points: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(n: usize, half_width: T, points: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("dimension must be >= 1".into()));
        }
        if !(half_width.is_finite() && half_width > T::zero()) {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be > 0")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be a power of two >= 8"
            )));
        }
        points
            .checked_pow(n as u32)
            .ok_or_else(|| Error::InvalidGrid("grid size overflows usize".into()))?;
        Ok(Self {
            n,
            half_width,
            points,
        })
    }

    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_width / T::from_usize_exact(self.points)
    }

    /// `h^N`.
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.n as i32)
    }

    /// Total number of samples `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, k: usize) -> T {
        -self.half_width + (T::from_usize_exact(k) + T::lit(0.5)) * self.spacing()
    }

    /// Per-axis coordinates.
    pub fn axis(&self) -> Vec<T> {
        (0..self.points).map(|k| self.coord(k)).collect()
    }

    /// Angular wavenumber of FFT bin `k`; bin `M/2` maps to `-π/h`.
    pub fn wavenumber(&self, k: usize) -> T {
        let m = self.points;
        let signed = if k < m / 2 {
            T::from_usize_exact(k)
        } else {
            -T::from_usize_exact(m - k)
        };
        signed * T::PI() / self.half_width
    }

    pub fn wavenumbers(&self) -> Vec<T> {
        (0..self.points).map(|k| self.wavenumber(k)).collect()
    }

    /// Nyquist wavenumber `π/h`.
    pub fn nyquist(&self) -> T {
        T::PI() / self.spacing()
    }

    /// Row-major multi-index of a flat index (axis 0 varies slowest).
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = flat % self.points;
            flat /= self.points;
        }
    }

    /// Physical coordinates of every sample, `N` per sample, row-major.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[T])) {
        let mut idx = vec![0usize; self.n];
        let mut x = vec![T::zero(); self.n];
        let axis = self.axis();
        for flat in 0..self.len() {
            self.unravel(flat, &mut idx);
            for (xi, &k) in x.iter_mut().zip(idx.iter()) {
                *xi = axis[k];
            }
            f(flat, &x);
        }
    }

    /// `|x|` at every sample.
    pub fn radii(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        self.for_each_point(|i, x| {
            out[i] = x.iter().fold(T::zero(), |acc, &c| acc + c * c).sqrt();
        });
        out
    }

    /// `|ξ|^2` at every FFT bin.
    pub fn wavenumber_sq(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        let ks = self.wavenumbers();
        let mut idx = vec![0usize; self.n];
        for (flat, slot) in out.iter_mut().enumerate() {
            self.unravel(flat, &mut idx);
            *slot = idx.iter().fold(T::zero(), |acc, &k| acc + ks[k] * ks[k]);
        }
        out
    }

    /// True when the flat index lies on the outermost layer of the cube.
    pub fn on_boundary(&self, flat: usize, scratch: &mut [usize]) -> bool {
        self.unravel(flat, scratch);
        scratch.iter().any(|&k| k == 0 || k + 1 == self.points)
    }
}
