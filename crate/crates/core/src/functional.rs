//! Mass, energy, potential and Weinstein functionals, the sharp constant
//! `K_opt`, and the scaling `u ↦ u_λ`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::GridSpec;
use crate::params::ModelParams;
use crate::radial::RadialProfile;
use crate::scalar::Real;
use crate::spectral::Spectral;
use crate::weights::singular_weights;

/// Anything the three basic integrals can be evaluated on: Cartesian
/// fields (midpoint rule, spectral gradient) and radial profiles (graded
/// Simpson rule).
pub trait Functional<T: Real> {
    /// `||u||² = M[u]`.
    fn l2_sq(&self) -> T;
    /// `||∇u||²`.
    fn grad_sq(&self) -> T;
    /// `I(u) = ∫ |x|^{-b} |u|^{2σ+2}`.
    fn potential(&self, params: &ModelParams<T>) -> Result<T>;
}

impl<T: Real> Functional<T> for FieldState<T> {
    fn l2_sq(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) * self.grid.cell_volume()
    }

    fn grad_sq(&self) -> T {
        Spectral::new(self.grid).grad_sq(&self.values)
    }

    fn potential(&self, params: &ModelParams<T>) -> Result<T> {
        let weights = singular_weights(&self.grid, params.b);
        Ok(potential_on_grid(&self.values, &weights, params, self.grid.cell_volume()))
    }
}

impl<T: Real> Functional<T> for RadialProfile<T> {
    fn l2_sq(&self) -> T {
        RadialProfile::l2_sq(self)
    }

    fn grad_sq(&self) -> T {
        RadialProfile::grad_sq(self)
    }

    fn potential(&self, params: &ModelParams<T>) -> Result<T> {
        if !(self.r[0] > T::zero()) {
            return Err(Error::SingularQuadrature);
        }
        Ok(RadialProfile::potential(self, params))
    }
}

/// `Σ w_k |u_k|^{2σ+2} h^N` with `w_k` the cell averages of `|x|^{-b}`.
pub(crate) fn potential_on_grid<T: Real>(values: &[Complex<T>], weights: &[T], params: &ModelParams<T>, cell: T) -> T {
    let half_p = params.sigma + T::one();
    let mut acc = T::zero();
    for (z, &w) in values.iter().zip(weights) {
        let m = z.norm_sqr();
        if m != T::zero() {
            acc = acc + w * m.powf(half_p);
        }
    }
    acc * cell
}

/// `M[u] = Σ |u_k|² h^N`.
pub fn mass<T: Real>(state: &FieldState<T>) -> T {
    state.l2_sq()
}

pub fn potential_term<T: Real, U: Functional<T> + ?Sized>(u: &U, params: &ModelParams<T>) -> Result<T> {
    u.potential(params)
}

/// `E[u] = ½||∇u||² - λ/(2σ+2) I(u)`.
pub fn energy<T: Real, U: Functional<T> + ?Sized>(u: &U, params: &ModelParams<T>) -> Result<T> {
    let kinetic = u.grad_sq() / T::lit(2.0);
    if params.coupling == T::zero() {
        return Ok(kinetic);
    }
    let pot = u.potential(params)?;
    Ok(kinetic - params.coupling * pot / (T::lit(2.0) * params.sigma + T::lit(2.0)))
}

/// Energy from precomputed norms.
pub fn energy_from_norms<T: Real>(grad_sq: T, pot: T, params: &ModelParams<T>) -> T {
    grad_sq / T::lit(2.0) - params.coupling * pot / (T::lit(2.0) * params.sigma + T::lit(2.0))
}

/// Weinstein functional `J(u) = ||∇u||^{Nσ+b} ||u||^{2σ+2-(Nσ+b)} / I(u)`.
pub fn weinstein<T: Real, U: Functional<T> + ?Sized>(u: &U, params: &ModelParams<T>) -> Result<T> {
    let pot = u.potential(params)?;
    weinstein_from_norms(u.grad_sq(), u.l2_sq(), pot, params)
}

pub fn weinstein_from_norms<T: Real>(grad_sq: T, l2_sq: T, pot: T, params: &ModelParams<T>) -> Result<T> {
    if pot == T::zero() {
        return Err(Error::ZeroDenominator);
    }
    let half = T::lit(0.5);
    Ok(grad_sq.powf(half * params.nsb()) * l2_sq.powf(half * params.l2_power()) / pot)
}

/// Sharp Gagliardo–Nirenberg constant from `||Q||`:
/// `(μ²)^{(2-(Nσ+b))/2} (2σ+2) / ((Nσ+b) ||Q||^{2σ})`, `μ² = (Nσ+b)/(2σ+2-(Nσ+b))`.
pub fn kopt<T: Real>(params: &ModelParams<T>, q_l2_norm: T) -> Result<T> {
    let d = params.l2_power();
    if d == T::zero() {
        return Err(Error::DegenerateExponent);
    }
    if !(q_l2_norm > T::zero()) {
        return Err(Error::InvalidArgument("||Q|| must be > 0".into()));
    }
    let nsb = params.nsb();
    let two = T::lit(2.0);
    let mu_sq = nsb / d;
    Ok(mu_sq.powf((two - nsb) / two) * (two * params.sigma + two) / (nsb * q_l2_norm.powf(two * params.sigma)))
}

/// Homogeneous Sobolev norm `||u||_{Ḣ^s}` with the zero mode dropped.
pub fn hs_norm<T: Real>(state: &FieldState<T>, s: T) -> T {
    Spectral::new(state.grid).hs_norm_sq(&state.values, s).sqrt()
}

/// Smallest per-axis wavenumber beyond which the spectrum carries at most
/// `tail` of the total spectral mass.
pub fn bandwidth<T: Real>(state: &FieldState<T>, tail: T) -> T {
    let grid = state.grid;
    let mut spec = Spectral::new(grid);
    let mut hat = state.values.clone();
    spec.forward(&mut hat);
    let m = grid.points;
    let half = m / 2;
    let mut shell = vec![T::zero(); half + 1];
    let mut idx = vec![0usize; grid.n];
    let mut total = T::zero();
    for (i, z) in hat.iter().enumerate() {
        grid.unravel(i, &mut idx);
        let kmax = idx.iter().map(|&k| if k <= half { k } else { m - k }).max().unwrap_or(0);
        let e = z.norm_sqr();
        shell[kmax] = shell[kmax] + e;
        total = total + e;
    }
    if total == T::zero() {
        return T::zero();
    }
    let mut beyond = T::zero();
    for k in (0..=half).rev() {
        beyond = beyond + shell[k];
        if beyond > tail * total {
            return T::from_usize_exact(k) * T::PI() / grid.half_width;
        }
    }
    T::zero()
}

/// `u_λ(x) = λ^{(2-b)/(2σ)} u(λx)` resampled onto `target` by band-limited
/// (trigonometric) interpolation; time becomes `t/λ²`.
///
/// Points where `λx` leaves the source cube are set to zero.
pub fn rescale<T: Real>(
    state: &FieldState<T>,
    lambda: T,
    params: &ModelParams<T>,
    target: GridSpec<T>,
) -> Result<FieldState<T>> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} must be > 0")));
    }
    if target.n != state.grid.n {
        return Err(Error::InvalidArgument("target grid dimension differs".into()));
    }
    let band = bandwidth(state, T::lit(1e-20));
    let nyq = target.nyquist();
    if lambda * band > nyq {
        return Err(Error::AliasingError {
            scaled: (lambda * band).to_f64_lossy(),
            nyquist: nyq.to_f64_lossy(),
        });
    }
    let src = state.grid;
    let mut hat = state.values.clone();
    Spectral::new(src).forward(&mut hat);

    // E[t][k] = exp(i ξ_k (λ y_t - x_0)) / M, Nyquist bin as a cosine.
    let ms = src.points;
    let mt = target.points;
    let x0 = src.coord(0);
    let ks = src.wavenumbers();
    let inv_m = T::one() / T::from_usize_exact(ms);
    let mut basis = vec![Complex::new(T::zero(), T::zero()); mt * ms];
    for t in 0..mt {
        let y = lambda * target.coord(t);
        if y < -src.half_width || y >= src.half_width {
            continue;
        }
        let s = y - x0;
        for k in 0..ms {
            basis[t * ms + k] = if k == ms / 2 {
                Complex::new((ks[k] * s).cos() * inv_m, T::zero())
            } else {
                Complex::new(T::zero(), ks[k] * s).exp() * inv_m
            };
        }
    }

    // contract axis by axis, row-major, axis 0 slowest
    let n = src.n;
    let mut data = hat;
    let mut shape = vec![ms; n];
    for axis in 0..n {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut out = vec![Complex::new(T::zero(), T::zero()); outer * mt * inner];
        for o in 0..outer {
            for t in 0..mt {
                let row = &basis[t * ms..(t + 1) * ms];
                if row.iter().all(|z| z.re == T::zero() && z.im == T::zero()) {
                    continue;
                }
                let dst = (o * mt + t) * inner;
                for (k, &w) in row.iter().enumerate() {
                    let srcoff = (o * ms + k) * inner;
                    for i in 0..inner {
                        out[dst + i] = out[dst + i] + w * data[srcoff + i];
                    }
                }
            }
        }
        shape[axis] = mt;
        data = out;
    }
    let amp = lambda.powf(params.scaling_exponent());
    for z in data.iter_mut() {
        *z = *z * amp;
    }
    FieldState::new(target, data, state.t / (lambda * lambda))
}
