//! Strang-split pseudo-spectral time stepping of
//! `i u_t + Δu + λ|x|^{-b}|u|^{2σ}u = 0` on a periodic box, with the
//! conserved quantities and virial diagnostics recorded along the way.
//!
//! One step is a half step of the nonlinear phase rotation
//! `u ↦ u exp(i dt/2 λ|x|^{-b}|u|^{2σ})` (exact, since `|u|` is invariant
//! under it), a full step of the free flow `û ↦ exp(-i dt|ξ|²) û`, and
//! another nonlinear half step. Both sub-flows preserve the discrete mass.
//! The weight `|x|^{-b}` enters through its cell averages (see
//! [`crate::weights`]), the same discretization used for the energy.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::functional::{mass, potential_on_grid};
use crate::grid::GridSpec;
use crate::params::ModelParams;
use crate::scalar::Real;
use crate::spectral::Spectral;
use crate::weights::singular_weights;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvolveConfig<T> {
    pub dt: T,
    pub t_final: T,
    pub record_every: usize,
    pub blowup_grad_factor: T,
    pub blowup_dt_floor: T,
    /// Halve `dt` each time `||∇u||²` doubles relative to the last change.
    pub adapt: bool,
    /// Largest boundary value allowed, relative to the initial maximum.
    pub boundary_tol: T,
    /// Largest spectral mass fraction allowed beyond two thirds of Nyquist.
    pub alias_limit: T,
}

impl<T: Real> EvolveConfig<T> {
    pub fn new(dt: T, t_final: T) -> Self {
        Self {
            dt,
            t_final,
            record_every: 1,
            blowup_grad_factor: T::lit(1e3),
            blowup_dt_floor: T::lit(1e-8),
            adapt: false,
            boundary_tol: T::lit(1e-10),
            alias_limit: T::lit(1e-4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return bad("dt must be > 0");
        }
        if !(self.t_final > T::zero() && self.t_final.is_finite()) {
            return bad("T must be > 0");
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1");
        }
        if !(self.blowup_grad_factor > T::one()) {
            return bad("blowup_grad_factor must be > 1");
        }
        if !(self.blowup_dt_floor > T::zero()) {
            return bad("blowup_dt_floor must be > 0");
        }
        if !(self.boundary_tol >= T::zero() && self.alias_limit > T::zero()) {
            return bad("boundary_tol and alias_limit must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantRecord<T> {
    pub t: T,
    pub mass: T,
    pub energy: T,
    pub grad_sq: T,
    pub variance: T,
    pub variance_rate: T,
    pub virial_rhs: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome")]
pub enum Outcome<T> {
    CompletedT,
    BlowUpDetected { t_detect: T },
    StepFloorHit { t: T },
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub records: Vec<InvariantRecord<T>>,
    pub outcome: Outcome<T>,
    pub final_state: FieldState<T>,
    pub steps: usize,
}

/// Reusable Strang stepper for one grid and one set of parameters.
pub struct Stepper<T: Real> {
    params: ModelParams<T>,
    spectral: Spectral<T>,
    weight: Vec<T>,
    radii_sq: Vec<T>,
    coords: Vec<Vec<T>>,
    multiplier: Vec<Complex<T>>,
    multiplier_dt: Option<T>,
    hat: Vec<Complex<T>>,
    /// `||∇u||²` and tail fraction of the spectrum seen by the last linear step.
    pub last_grad_sq: T,
    pub last_tail: T,
}

impl<T: Real> Stepper<T> {
    pub fn new(grid: &GridSpec<T>, params: &ModelParams<T>) -> Result<Self> {
        if grid.n != params.n {
            return Err(Error::InvalidGrid(format!(
                "grid dimension {} differs from model dimension {}",
                grid.n, params.n
            )));
        }
        let radii = grid.radii();
        let weight = singular_weights(grid, params.b);
        let mut coords = vec![Vec::with_capacity(grid.len()); grid.n];
        grid.for_each_point(|_, x| {
            for (c, &xi) in coords.iter_mut().zip(x) {
                c.push(xi);
            }
        });
        Ok(Self {
            params: *params,
            spectral: Spectral::new(*grid),
            weight,
            radii_sq: radii.iter().map(|&r| r * r).collect(),
            coords,
            multiplier: Vec::new(),
            multiplier_dt: None,
            hat: vec![Complex::new(T::zero(), T::zero()); grid.len()],
            last_grad_sq: T::zero(),
            last_tail: T::zero(),
        })
    }

    fn nonlinear_phase(&self, values: &mut [Complex<T>], tau: T) {
        let p = &self.params;
        if p.coupling == T::zero() || tau == T::zero() {
            return;
        }
        let s = p.sigma;
        for (u, &w) in values.iter_mut().zip(&self.weight) {
            let amp2 = u.norm_sqr();
            if amp2 == T::zero() {
                continue;
            }
            let phase = tau * p.coupling * w * amp2.powf(s);
            *u = *u * Complex::from_polar(T::one(), phase);
        }
    }

    fn linear(&mut self, values: &mut [Complex<T>], dt: T) {
        if self.multiplier_dt != Some(dt) {
            self.multiplier = self
                .spectral
                .k_sq()
                .iter()
                .map(|&k2| Complex::from_polar(T::one(), -dt * k2))
                .collect();
            self.multiplier_dt = Some(dt);
        }
        self.hat.copy_from_slice(values);
        self.spectral.forward(&mut self.hat);
        self.last_grad_sq = self.spectral.grad_sq_of_hat(&self.hat);
        self.last_tail = self.spectral.tail_fraction_of_hat(&self.hat);
        for (h, m) in self.hat.iter_mut().zip(&self.multiplier) {
            *h = *h * *m;
        }
        self.spectral.inverse(&mut self.hat);
        values.copy_from_slice(&self.hat);
    }

    /// One Strang step in place.
    pub fn step(&mut self, state: &mut FieldState<T>, dt: T) -> Result<()> {
        if dt == T::zero() {
            return Ok(());
        }
        let half = dt / T::lit(2.0);
        let mut values = std::mem::take(&mut state.values);
        self.nonlinear_phase(&mut values, half);
        self.linear(&mut values, dt);
        self.nonlinear_phase(&mut values, half);
        state.values = values;
        state.t = state.t + dt;
        if state.values.iter().any(|u| !(u.re.is_finite() && u.im.is_finite())) {
            return Err(Error::NonFinite { at: state.t.to_f64_lossy() });
        }
        Ok(())
    }

    pub fn grad_sq(&mut self, state: &FieldState<T>) -> T {
        self.spectral.grad_sq(&state.values)
    }

    pub fn potential(&self, state: &FieldState<T>) -> T {
        potential_on_grid(&state.values, &self.weight, &self.params, state.grid.cell_volume())
    }

    pub fn energy(&mut self, state: &FieldState<T>) -> T {
        let two = T::lit(2.0);
        let grad = self.grad_sq(state);
        grad / two - self.params.coupling * self.potential(state) / (two * self.params.sigma + two)
    }

    pub fn variance(&self, state: &FieldState<T>) -> T {
        let vol = state.grid.cell_volume();
        state
            .values
            .iter()
            .zip(&self.radii_sq)
            .fold(T::zero(), |acc, (u, &r2)| acc + r2 * u.norm_sqr())
            * vol
    }

    pub fn variance_rate(&mut self, state: &FieldState<T>) -> T {
        let mut hat = state.values.clone();
        self.spectral.forward(&mut hat);
        let mut acc = T::zero();
        for axis in 0..state.grid.n {
            let d = self.spectral.derivative_from_hat(&hat, axis);
            for ((u, du), &x) in state.values.iter().zip(&d).zip(&self.coords[axis]) {
                acc = acc + (u.conj() * *du).im * x;
            }
        }
        T::lit(4.0) * acc * state.grid.cell_volume()
    }

    pub fn record(&mut self, state: &FieldState<T>, energy0: T) -> InvariantRecord<T> {
        let grad_sq = self.grad_sq(state);
        let two = T::lit(2.0);
        let pot = self.potential(state);
        InvariantRecord {
            t: state.t,
            mass: mass(state),
            energy: grad_sq / two - self.params.coupling * pot / (two * self.params.sigma + two),
            grad_sq,
            variance: self.variance(state),
            variance_rate: self.variance_rate(state),
            virial_rhs: virial_rhs(energy0, grad_sq, &self.params),
        }
    }
}

/// Single Strang step; builds a fresh [`Stepper`]. Use [`Stepper`] directly
/// for repeated steps.
pub fn step_strang<T: Real>(state: &FieldState<T>, dt: T, params: &ModelParams<T>) -> Result<FieldState<T>> {
    let mut out = state.clone();
    if dt == T::zero() {
        return Ok(out);
    }
    Stepper::new(&state.grid, params)?.step(&mut out, dt)?;
    Ok(out)
}

/// `∫|x|²|u|²` by the midpoint rule.
pub fn variance<T: Real>(state: &FieldState<T>) -> T {
    let vol = state.grid.cell_volume();
    let mut acc = T::zero();
    state.grid.for_each_point(|k, x| {
        let r2 = x.iter().fold(T::zero(), |a, &c| a + c * c);
        acc = acc + r2 * state.values[k].norm_sqr();
    });
    acc * vol
}

/// `4 Im ∫ ū (∇u · x)` with the spectral gradient.
pub fn variance_rate<T: Real>(state: &FieldState<T>) -> T {
    let mut spectral = Spectral::new(state.grid);
    let mut hat = state.values.clone();
    spectral.forward(&mut hat);
    let mut acc = T::zero();
    for axis in 0..state.grid.n {
        let d = spectral.derivative_from_hat(&hat, axis);
        state.grid.for_each_point(|k, x| {
            acc = acc + (state.values[k].conj() * d[k]).im * x[axis];
        });
    }
    T::lit(4.0) * acc * state.grid.cell_volume()
}

/// `8(Nσ+b) E0 - 4(Nσ+b-2) ||∇u||²`, the second time derivative of the
/// variance.
pub fn virial_rhs<T: Real>(energy0: T, grad_sq: T, params: &ModelParams<T>) -> T {
    let nsb = params.nsb();
    T::lit(8.0) * nsb * energy0 - T::lit(4.0) * (nsb - T::lit(2.0)) * grad_sq
}

/// First positive zero of `V0 + V0' t + 4(Nσ+b) E0 t²`, which bounds the
/// lifetime of finite-variance solutions when `Nσ+b >= 2`.
pub fn virial_bound_time<T: Real>(v0: T, v0_rate: T, energy0: T, params: &ModelParams<T>) -> Option<T> {
    let a = T::lit(4.0) * params.nsb() * energy0;
    let (b, c) = (v0_rate, v0);
    if a == T::zero() {
        return if b < T::zero() { Some(-c / b) } else { None };
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    let q = -(b + b.signum() * sq) / T::lit(2.0);
    let mut roots = [q / a, if q != T::zero() { c / q } else { T::nan() }];
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Greater));
    roots.into_iter().find(|&t| t > T::zero())
}

/// First record time with `||∇u||² >= blowup_grad_factor · initial_grad_sq`.
pub fn detect_blowup<T: Real>(records: &[InvariantRecord<T>], cfg: &EvolveConfig<T>, initial_grad_sq: T) -> Option<T> {
    if !(initial_grad_sq > T::zero()) {
        return None;
    }
    let limit = cfg.blowup_grad_factor * initial_grad_sq;
    records.iter().find(|r| r.grad_sq >= limit).map(|r| r.t)
}

pub fn evolve<T: Real>(u0: &FieldState<T>, params: &ModelParams<T>, cfg: &EvolveConfig<T>) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let mut stepper = Stepper::new(&u0.grid, params)?;
    let mut state = u0.clone();
    let t_end = u0.t + cfg.t_final;
    let peak = u0.max_abs();
    let boundary_limit = cfg.boundary_tol * peak;
    let check_boundary = |s: &FieldState<T>| -> Result<()> {
        let edge = s.boundary_max_abs();
        if edge > boundary_limit {
            return Err(Error::DomainTooSmall(format!(
                "boundary value {edge} exceeds {boundary_limit} at t = {}",
                s.t
            )));
        }
        Ok(())
    };
    check_boundary(&state)?;

    let energy0 = stepper.energy(&state);
    let first = stepper.record(&state, energy0);
    let grad0 = first.grad_sq;
    let mut records = vec![first];
    let grad_limit = cfg.blowup_grad_factor * grad0;
    let mut dt = cfg.dt;
    let mut grad_at_adapt = grad0;
    let mut steps = 0usize;
    let mut outcome = Outcome::CompletedT;
    let eps = T::lit(1e-12) * cfg.t_final;

    while t_end - state.t > eps {
        let h = dt.min(t_end - state.t);
        stepper.step(&mut state, h)?;
        steps += 1;
        let grad = stepper.last_grad_sq;
        if grad0 > T::zero() && grad >= grad_limit {
            records.push(stepper.record(&state, energy0));
            outcome = Outcome::BlowUpDetected { t_detect: state.t };
            break;
        }
        if stepper.last_tail > cfg.alias_limit {
            return Err(Error::AliasDetected {
                t: state.t.to_f64_lossy(),
                fraction: stepper.last_tail.to_f64_lossy(),
                limit: cfg.alias_limit.to_f64_lossy(),
            });
        }
        if cfg.adapt && grad0 > T::zero() && grad >= T::lit(2.0) * grad_at_adapt {
            dt = dt / T::lit(2.0);
            grad_at_adapt = grad;
            if dt < cfg.blowup_dt_floor {
                records.push(stepper.record(&state, energy0));
                outcome = Outcome::StepFloorHit { t: state.t };
                break;
            }
        }
        let done = t_end - state.t <= eps;
        if steps.is_multiple_of(cfg.record_every) || done {
            check_boundary(&state)?;
            records.push(stepper.record(&state, energy0));
        }
    }
    Ok(Trajectory {
        records,
        outcome,
        final_state: state,
        steps,
    })
}
