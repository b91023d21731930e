//! Threshold quantities of the global-existence / blow-up dichotomy and the
//! scalar barrier machinery behind it.
//!
//! For initial data `u0` and the ground state `Q` the comparison is made
//! between
//!
//! ```text
//! me(u) = E[u]^s M[u]^{1-s}          g(u) = ||∇u||^s ||u||^{1-s}
//! ```
//!
//! with `s` the critical index. Below the mass-energy threshold, data with
//! `g(u0) < g(Q)` stay trapped there, and finite-variance data with
//! `g(u0) > g(Q)` blow up.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::groundstate::GroundStateReport;
use crate::params::ModelParams;
use crate::scalar::Real;

/// Relative width of the band in which `g(u0)` and `g(Q)` count as equal.
pub const THRESHOLD_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Global,
    BlowUp,
    Threshold,
    Indeterminate,
    CriticalGlobal,
    OutsideTheory,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdReport<T> {
    /// `sign(E) |E|^s M^{1-s}` for the data (the sign keeps negative
    /// energies below every positive threshold).
    pub me_u: T,
    pub me_q: T,
    pub g_u: T,
    pub g_q: T,
    pub finite_variance: bool,
    pub verdict: Verdict,
}

/// Mass-energy quantity `sign(E)|E|^s M^{1-s}`.
pub fn mass_energy<T: Real>(energy: T, mass: T, s: T) -> T {
    let mag = if s == T::zero() { T::one() } else { energy.abs().powf(s) };
    energy.signum() * mag * mass.powf(T::one() - s)
}

/// Gradient quantity `||∇u||^s ||u||^{1-s}` from squared norms.
pub fn gradient_quantity<T: Real>(grad_sq: T, l2_sq: T, s: T) -> T {
    let half = T::lit(0.5);
    grad_sq.powf(half * s) * l2_sq.powf(half * (T::one() - s))
}

/// Threshold values `(me_q, g_q)` of the ground state. `E[Q]` comes from the
/// mass identity rather than from the quadrature of the energy.
pub fn ground_state_thresholds<T: Real>(params: &ModelParams<T>, gs: &GroundStateReport<T>) -> (T, T) {
    let s = params.s_sigma();
    (
        mass_energy(gs.energy_q(), gs.l2_sq, s),
        gradient_quantity(gs.grad_sq, gs.l2_sq, s),
    )
}

pub fn classify<T: Real, U: Functional<T> + ?Sized>(
    u0: &U,
    params: &ModelParams<T>,
    gs: &GroundStateReport<T>,
    finite_variance: bool,
) -> Result<ThresholdReport<T>> {
    let l2 = u0.l2_sq();
    if !(l2 > T::zero()) {
        return Err(Error::InvalidArgument("initial data must be nonzero".into()));
    }
    let grad = u0.grad_sq();
    let pot = u0.potential(params)?;
    classify_norms(params, gs, l2, grad, pot, finite_variance)
}

/// [`classify`] from the squared norms `||u0||²`, `||∇u0||²` and the
/// potential term `∫|x|^{-b}|u0|^{2σ+2}` of the data.
pub fn classify_norms<T: Real>(
    params: &ModelParams<T>,
    gs: &GroundStateReport<T>,
    l2_sq: T,
    grad_sq: T,
    pot: T,
    finite_variance: bool,
) -> Result<ThresholdReport<T>> {
    let critical = params.is_mass_critical();
    if !critical && !params.supercritical() {
        return Err(Error::NotSupercritical {
            sigma: params.sigma.to_f64_lossy(),
            critical: params.critical_sigma().to_f64_lossy(),
        });
    }
    let s = if critical { T::zero() } else { params.s_sigma() };
    let two = T::lit(2.0);
    let energy = grad_sq / two - params.coupling * pot / (two * params.sigma + two);
    let me_u = mass_energy(energy, l2_sq, s);
    let g_u = gradient_quantity(grad_sq, l2_sq, s);
    let (me_q, g_q) = if critical {
        (gs.l2_sq, gs.l2_sq.sqrt())
    } else {
        ground_state_thresholds(params, gs)
    };
    let on_threshold = (g_u - g_q).abs() <= T::lit(THRESHOLD_BAND) * g_q;

    let verdict = if critical {
        if on_threshold {
            Verdict::Threshold
        } else if g_u < g_q {
            Verdict::CriticalGlobal
        } else {
            Verdict::OutsideTheory
        }
    } else if on_threshold {
        Verdict::Threshold
    } else if me_u < me_q {
        if g_u < g_q {
            Verdict::Global
        } else if finite_variance {
            Verdict::BlowUp
        } else {
            Verdict::OutsideTheory
        }
    } else if g_u > g_q {
        Verdict::OutsideTheory
    } else {
        Verdict::Indeterminate
    };
    Ok(ThresholdReport {
        me_u,
        me_q,
        g_u,
        g_q,
        finite_variance,
        verdict,
    })
}

/// The barrier `f(x) = x - B x^{(Nσ+b)/2}` bounding `X(t) = ||∇u(t)||²`
/// through `f(X(t)) <= A = 2E[u0]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BarrierCurve<T> {
    pub a: T,
    pub b: T,
    pub x0: T,
    pub fx0: T,
    /// `2E[u0] < f(x0)`.
    pub below_peak: bool,
    exponent: T,
}

impl<T: Real> BarrierCurve<T> {
    pub fn eval(&self, x: T) -> T {
        x - self.b * x.powf(self.exponent)
    }
}

pub fn barrier<T: Real>(params: &ModelParams<T>, u0_mass: T, u0_energy: T, kopt: T) -> Result<BarrierCurve<T>> {
    let two = T::lit(2.0);
    let nsb = params.nsb();
    if !(nsb > two) {
        return Err(Error::NotSupercritical {
            sigma: params.sigma.to_f64_lossy(),
            critical: params.critical_sigma().to_f64_lossy(),
        });
    }
    let b = params.coupling * kopt / (params.sigma + T::one()) * u0_mass.sqrt().powf(params.l2_power());
    if !(b > T::zero() && b.is_finite()) {
        return Err(Error::DegenerateBarrier(b.to_f64_lossy()));
    }
    let x0 = (two / (b * nsb)).powf(two / (nsb - two));
    let fx0 = (nsb - two) / nsb * x0;
    let a = two * u0_energy;
    Ok(BarrierCurve {
        a,
        b,
        x0,
        fx0,
        below_peak: a < fx0,
        exponent: nsb / two,
    })
}

/// `((Nσ+b)/2)^{1/(Nσ+b-2)}`, the ratio between the root and the peak of
/// the normalised barrier.
pub fn trap_constant<T: Real>(params: &ModelParams<T>) -> Result<T> {
    let two = T::lit(2.0);
    let nsb = params.nsb();
    if !(nsb > two) {
        return Err(Error::NotSupercritical {
            sigma: params.sigma.to_f64_lossy(),
            critical: params.critical_sigma().to_f64_lossy(),
        });
    }
    Ok((nsb / two).powf(T::one() / (nsb - two)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrapCase {
    NonPositiveE,
    PositiveE,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyTrap<T> {
    /// Lower bound on `||∇u||^s ||u||^{1-s}`.
    pub bound: T,
    /// Multiplier of `g(Q)` in the bound.
    pub constant: T,
    pub case: TrapCase,
}

/// Lower bound on `g(u)` for data above the gradient threshold.
///
/// With `x = ||∇u|| ||u||^{(1-s)/s}` one has `g(u) = x^s`, and the energy
/// controls `x` from below through [`section5_barrier`]: `x >= x_root` when
/// `E <= 0`, and `x` beyond the tangent parabola when `0 < E` and
/// `me(u) < me(Q)`. The constants returned are therefore
/// `c^s` and `(1 + (1 - ℰu/ℰQ)^{1/2}(c - 1))^s` with `c` the
/// [`trap_constant`] and `ℰ = E M^{(1-s)/s}`.
pub fn energy_trap<T: Real>(
    u_mass: T,
    u_energy: T,
    u_grad_sq: T,
    params: &ModelParams<T>,
    gs: &GroundStateReport<T>,
) -> Result<EnergyTrap<T>> {
    let c = trap_constant(params)?;
    let s = params.s_sigma();
    let (me_q, g_q) = ground_state_thresholds(params, gs);
    if u_energy <= T::zero() {
        let constant = c.powf(s);
        return Ok(EnergyTrap {
            bound: constant * g_q,
            constant,
            case: TrapCase::NonPositiveE,
        });
    }
    let me_u = mass_energy(u_energy, u_mass, s);
    if !(me_u < me_q) {
        return Err(Error::HypothesisViolated(format!(
            "mass-energy {me_u} not below the ground-state value {me_q}"
        )));
    }
    let g_u = gradient_quantity(u_grad_sq, u_mass, s);
    if !(g_u > g_q) {
        return Err(Error::HypothesisViolated(format!(
            "gradient quantity {g_u} not above the ground-state value {g_q}"
        )));
    }
    let ratio = (me_u / me_q).powf(T::one() / s);
    let constant = trap_part_b_constant(c, ratio, s);
    Ok(EnergyTrap {
        bound: constant * g_q,
        constant,
        case: TrapCase::PositiveE,
    })
}

/// `(1 + (1 - ratio)^{1/2}(c - 1))^s` for `ratio = ℰu/ℰQ ∈ [0, 1)`.
pub fn trap_part_b_constant<T: Real>(c: T, ratio: T, s: T) -> T {
    (T::one() + (T::one() - ratio).sqrt() * (c - T::one())).powf(s)
}

/// `f(x) = ½x² - (K/(2σ+2)) x^{Nσ+b}`, the barrier in the variable
/// `x = ||∇u|| ||u||^{(1-s)/s}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Section5Barrier<T> {
    pub kopt: T,
    pub x_max: T,
    pub f_at_x_max: T,
    pub x_root: T,
    coeff: T,
    power: T,
}

impl<T: Real> Section5Barrier<T> {
    pub fn eval(&self, x: T) -> T {
        x * x / T::lit(2.0) - self.coeff * x.powf(self.power)
    }

    pub fn derivative(&self, x: T) -> T {
        x - self.coeff * self.power * x.powf(self.power - T::one())
    }
}

pub fn section5_barrier<T: Real>(params: &ModelParams<T>, gs: &GroundStateReport<T>) -> Result<Section5Barrier<T>> {
    let c = trap_constant(params)?;
    let s = params.s_sigma();
    let theta = (T::one() - s) / s;
    let x_max = gs.grad_sq.sqrt() * gs.l2_sq.sqrt().powf(theta);
    Ok(Section5Barrier {
        kopt: gs.kopt,
        x_max,
        f_at_x_max: gs.energy_q() * gs.l2_sq.powf(theta),
        x_root: c * x_max,
        coeff: params.coupling * gs.kopt / (T::lit(2.0) * params.sigma + T::lit(2.0)),
        power: params.nsb(),
    })
}

/// `f(x) = ½x² - a x^α` with its positive peak and positive root.
#[derive(Debug, Clone, Copy)]
pub struct PowerBarrier<T> {
    pub a: T,
    pub alpha: T,
}

impl<T: Real> PowerBarrier<T> {
    pub fn new(a: T, alpha: T) -> Result<Self> {
        if !(a > T::zero() && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("a = {a} must be > 0")));
        }
        if !(alpha > T::lit(2.0) && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must be > 2")));
        }
        Ok(Self { a, alpha })
    }

    pub fn f(&self, x: T) -> T {
        x * x / T::lit(2.0) - self.a * x.powf(self.alpha)
    }

    pub fn x_max(&self) -> T {
        (T::one() / (self.a * self.alpha)).powf(T::one() / (self.alpha - T::lit(2.0)))
    }

    pub fn x_root(&self) -> T {
        (T::lit(2.0) * self.a).powf(-T::one() / (self.alpha - T::lit(2.0)))
    }

    /// Parabola with vertex `(x_max, f(x_max))` through `(x_root, 0)`.
    pub fn parabola(&self, x: T) -> T {
        let (xm, xr) = (self.x_max(), self.x_root());
        let d = (x - xm) / (xr - xm);
        self.f(xm) * (T::one() - d * d)
    }
}

/// `f(x) - p(x)` on `[x_max, x_root]`, where `p` is the parabola with vertex
/// at the peak of `f(x) = ½x² - a x^α` and the same positive root.
pub fn lemma51_gap<T: Real>(a: T, alpha: T, x: T) -> Result<T> {
    let f = PowerBarrier::new(a, alpha)?;
    let (lo, hi) = (f.x_max(), f.x_root());
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfInterval {
            x: x.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    Ok(f.f(x) - f.parabola(x))
}

/// `(A, B) = (½ - 1/α, (α/2)^{1/(α-2)})`: the peak value and the root of
/// `F(x) = ½x² - x^α/α`, whose peak sits at `x = 1`.
pub fn lemma51_normalized_constants<T: Real>(alpha: T) -> Result<(T, T)> {
    let two = T::lit(2.0);
    if !(alpha > two && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be > 2")));
    }
    let a = T::lit(0.5) - T::one() / alpha;
    let b = ((alpha - two) / two).ln_1p() / (alpha - two);
    Ok((a, b.exp()))
}

/// `((1 + 1/√(x+2))^x - (x+2)/2, (1+x)^{1/(2x)+1}((1+x)^{1/(2x)} - 1) - 1)`.
///
/// Both are evaluated through `ln_1p`/`exp_m1`; the first overflows to
/// `+inf` for `x` beyond roughly `5e5`.
pub fn lemma51_scalar_inequalities<T: Real>(x: T) -> Result<(T, T)> {
    if !(x > T::zero()) {
        return Err(Error::InvalidArgument(format!("x = {x} must be > 0")));
    }
    let two = T::lit(2.0);
    let first = (x * (T::one() / (x + two).sqrt()).ln_1p()).exp() - (x + two) / two;
    let l = x.ln_1p();
    let half = l / (two * x);
    let second = (half + l).exp() * half.exp_m1() - T::one();
    Ok((first, second))
}
