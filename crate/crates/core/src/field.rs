//! Complex fields sampled on a [`GridSpec`].

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::Real;

/// Complex field `u(x, t)` on a cell-centred grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState<T> {
    pub grid: GridSpec<T>,
    pub values: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> FieldState<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<Complex<T>>, t: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { at: t.to_f64_lossy() });
        }
        Ok(Self { grid, values, t })
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.len()],
            grid,
            t: T::zero(),
        }
    }

    /// Samples `f(x)` at every grid point, `t = 0`.
    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut(&[T]) -> Complex<T>) -> Result<Self> {
        let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        grid.for_each_point(|i, x| values[i] = f(x));
        Self::new(grid, values, T::zero())
    }

    /// `A exp(-|x - c e_1|^2 / (2 w^2))`, shifted along the first axis.
    pub fn gaussian(grid: GridSpec<T>, amplitude: T, width: T, center: T) -> Result<Self> {
        let two_w2 = T::lit(2.0) * width * width;
        Self::from_fn(grid, |x| {
            let r2 = x
                .iter()
                .enumerate()
                .map(|(i, &c)| if i == 0 { c - center } else { c })
                .fold(T::zero(), |acc, c| acc + c * c);
            Complex::new(amplitude * (-r2 / two_w2).exp(), T::zero())
        })
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&z| z * c).collect(),
            t: self.t,
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest `|u|` on the outermost layer of the cube.
    pub fn boundary_max_abs(&self) -> T {
        let mut scratch = vec![0usize; self.grid.n];
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.on_boundary(*i, &mut scratch))
            .fold(T::zero(), |m, (_, z)| m.max(z.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }
}
