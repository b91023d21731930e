//! Ground state of `ΔQ - Q + |x|^{-b} |Q|^{2σ} Q = 0` by shooting on the
//! radial ODE
//!
//! ```text
//! Q'' + (N-1)/r Q' - Q + r^{-b} Q^{2σ+1} = 0,   Q(0) = α,  Q'(0) = 0,
//! ```
//!
//! with bisection on `α` between an undershoot (`Q'` turns positive while
//! `Q > 0`) and an overshoot (`Q` crosses zero).
//!
//! Double precision fixes `α` only to about one ulp, and the growing mode
//! `~e^{r}` of the linearised tail amplifies that error until the two
//! bracketing trajectories separate (around `Q ~ 1e-5 α`). The profile is
//! therefore assembled from the mean of the final bracket up to the radius
//! where the two trajectories agree to `cut_tol`, and continued beyond it
//! by the decaying solution of `T'' + (N-1)/r T' - T = 0`, where the
//! nonlinear term is negligible.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::GridSpec;
use crate::functional::kopt;
use crate::ode::{Dopri5, Dopri5Options};
use crate::params::ModelParams;
use crate::radial::{fd_derivative, graded_grid, OriginSeries, RadialProfile};
use crate::scalar::{rel_diff, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShootKind {
    Overshoot,
    Undershoot,
    Converged,
}

/// Result of one shot. A trajectory that reaches `r_max` without either
/// event and without decaying below the tail threshold counts as an
/// undershoot (it stays trapped away from zero). `profile` holds the
/// samples integrated up to the classifying event.
#[derive(Debug, Clone)]
pub struct ShootOutcome<T> {
    pub kind: ShootKind,
    pub profile: RadialProfile<T>,
    pub crossing_r: Option<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions<T> {
    pub r_max: T,
    /// Uniform spacing away from the origin.
    pub h: T,
    /// Geometric growth factor `Δr / r` of the graded part near the origin.
    pub grading: T,
    /// Launch radius; `None` picks one from the origin series.
    pub r0: Option<T>,
    /// `Converged` once `Q < tail_tol · α`. Zero disables the test.
    pub tail_tol: T,
    /// Integrator settings; `atol` is taken relative to `α`.
    pub ode: Dopri5Options<T>,
}

impl<T: Real> Default for ShootOptions<T> {
    fn default() -> Self {
        Self {
            r_max: T::lit(30.0),
            h: T::lit(1e-3),
            grading: T::lit(1e-2),
            r0: None,
            tail_tol: T::lit(1e-6),
            ode: Dopri5Options {
                atol: T::lit(1e-15),
                ..Dopri5Options::default()
            },
        }
    }
}

/// Launch radius: at most `1e-6`, and small enough that the first term
/// dropped from the origin series is below `1e-16 α`.
pub fn launch_radius<T: Real>(params: &ModelParams<T>, alpha: T) -> T {
    let s = OriginSeries::new(params, alpha);
    let two = T::lit(2.0);
    let mut r0 = T::lit(1e-6);
    if s.c1 != T::zero() {
        let target = T::lit(1e-8) / (two * params.sigma + T::one()).sqrt() * alpha / s.c1.abs();
        r0 = r0.min(target.powf(T::one() / (two - params.b)));
    }
    r0.max(T::lit(1e-280))
}

/// Integrates one shot with default options and the given range and spacing.
pub fn shoot<T: Real>(params: &ModelParams<T>, alpha: T, r_max: T, h: T) -> Result<ShootOutcome<T>> {
    let opts = ShootOptions {
        r_max,
        h,
        ..ShootOptions::default()
    };
    shoot_with(params, alpha, &opts)
}

pub fn shoot_with<T: Real>(params: &ModelParams<T>, alpha: T, opts: &ShootOptions<T>) -> Result<ShootOutcome<T>> {
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be > 0")));
    }
    let r0 = opts.r0.unwrap_or_else(|| launch_radius(params, alpha));
    let grid = graded_grid(r0, opts.h, opts.grading, opts.r_max);
    shoot_on_grid(params, alpha, &grid, opts)
}

fn shoot_on_grid<T: Real>(
    params: &ModelParams<T>,
    alpha: T,
    grid: &[T],
    opts: &ShootOptions<T>,
) -> Result<ShootOutcome<T>> {
    let n1 = params.dim() - T::one();
    let b = params.b;
    let lam = params.coupling;
    let two_sigma = T::lit(2.0) * params.sigma;
    let rhs = |r: T, y: &[T; 2]| {
        let q = y[0];
        let weight = if b == T::zero() { T::one() } else { r.powf(-b) };
        let nl = lam * weight * q.abs().powf(two_sigma) * q;
        [y[1], q - n1 / r * y[1] - nl]
    };

    let series = OriginSeries::new(params, alpha);
    let r0 = grid[0];
    let mut y = [series.value(r0), series.slope(r0)];
    let mut rs = vec![r0];
    let mut qs = vec![y[0]];
    let mut dqs = vec![y[1]];
    let mut ode = Dopri5::new(Dopri5Options {
        atol: opts.ode.atol * alpha,
        ..opts.ode
    });
    let tail = opts.tail_tol * alpha;

    let mut kind = ShootKind::Undershoot;
    let mut crossing = None;
    if y[1] > T::zero() {
        kind = ShootKind::Undershoot;
    } else {
        for w in grid.windows(2) {
            let (ra, rb) = (w[0], w[1]);
            let prev = y;
            y = ode.integrate(&rhs, ra, y, rb)?;
            if !(y[0].is_finite() && y[1].is_finite()) {
                return Err(Error::NonFinite { at: rb.to_f64_lossy() });
            }
            rs.push(rb);
            qs.push(y[0]);
            dqs.push(y[1]);
            if y[0] < T::zero() {
                kind = ShootKind::Overshoot;
                crossing = Some(ra + (rb - ra) * prev[0] / (prev[0] - y[0]));
                break;
            }
            if y[1] > T::zero() {
                kind = ShootKind::Undershoot;
                break;
            }
            if y[0] < tail {
                kind = ShootKind::Converged;
                break;
            }
        }
    }
    // pad so short shots still form a valid sample set
    while rs.len() < 5 {
        let k = rs.len();
        rs.push(grid[k.min(grid.len() - 1)].max(rs[k - 1] * T::lit(1.0 + 1e-9)));
        qs.push(qs[k - 1]);
        dqs.push(dqs[k - 1]);
    }
    let mut profile = RadialProfile::from_parts(*params, rs, qs, dqs)?;
    profile.alpha = alpha;
    Ok(ShootOutcome {
        kind,
        profile,
        crossing_r: crossing,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct GroundStateOptions<T> {
    pub shoot: ShootOptions<T>,
    /// Extra range integrated past `r_max` so every shot ends in an event.
    pub overrun: T,
    /// Relative separation of the final bracket that ends the trusted range.
    pub cut_tol: T,
    pub bracket: (T, T),
    pub scan_points: usize,
    pub max_bisections: usize,
}

impl<T: Real> Default for GroundStateOptions<T> {
    fn default() -> Self {
        Self {
            shoot: ShootOptions {
                tail_tol: T::zero(),
                ..ShootOptions::default()
            },
            overrun: T::lit(20.0),
            cut_tol: T::lit(1e-6),
            bracket: (T::lit(1e-2), T::lit(1e2)),
            scan_points: 41,
            max_bisections: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport<T> {
    pub profile: RadialProfile<T>,
    pub l2_sq: T,
    pub grad_sq: T,
    pub pot: T,
    pub kopt: T,
    /// Largest `|Q'' + (N-1)/r Q' - Q + r^{-b} Q^{2σ+1}|` for `r >= 0.1`.
    pub eq_res: T,
    /// Relative residuals of `||∇Q||² = μ²||Q||²` and of the potential identity.
    pub pohozaev_res: (T, T),
    /// Relative residual of the two energy identities.
    pub energy_res: T,
    pub bisections: usize,
}

impl<T: Real> GroundStateReport<T> {
    pub fn alpha(&self) -> T {
        self.profile.alpha
    }

    /// `E[Q]` through the mass identity `(Nσ+b-2)/(2(2σ+2-(Nσ+b))) ||Q||²`.
    pub fn energy_q(&self) -> T {
        let p = &self.profile.params;
        (p.nsb() - T::lit(2.0)) / (T::lit(2.0) * p.l2_power()) * self.l2_sq
    }

    pub fn max_residual(&self) -> T {
        self.pohozaev_res.0.max(self.pohozaev_res.1).max(self.energy_res)
    }
}

/// Relative residuals `(res9, res10, res16)` of the ground-state identities
/// `||∇Q||² = μ² ||Q||²`, `I(Q) = (2σ+2)/(2σ+2-(Nσ+b)) ||Q||²` and
/// `E[Q] = (Nσ+b-2)/(2(2σ+2-(Nσ+b))) ||Q||² = (Nσ+b-2)/(2(Nσ+b)) ||∇Q||²`,
/// all evaluated from the profile's own quadrature.
///
/// The energy residual is relative to the predicted `E[Q]`, or to
/// `½||∇Q||²` in the mass-critical case where `E[Q] = 0`.
pub fn pohozaev_check<T: Real>(profile: &RadialProfile<T>) -> (T, T, T) {
    let p = &profile.params;
    let l2 = profile.l2_sq();
    let grad = profile.grad_sq();
    let pot = profile.potential(p);
    residuals_from_norms(p, l2, grad, pot)
}

fn residuals_from_norms<T: Real>(p: &ModelParams<T>, l2: T, grad: T, pot: T) -> (T, T, T) {
    let two = T::lit(2.0);
    let d = p.l2_power();
    let nsb = p.nsb();
    let res9 = rel_diff(grad, nsb / d * l2);
    let res10 = rel_diff(pot, (two * p.sigma + two) / d * l2);
    let e = grad / two - pot / (two * p.sigma + two);
    let e_mass = (nsb - two) / (two * d) * l2;
    let e_grad = (nsb - two) / (two * nsb) * grad;
    let scale = if e_mass == T::zero() { grad / two } else { e_mass.abs() };
    let res16 = ((e - e_mass).abs().max((e - e_grad).abs())) / scale;
    (res9, res10, res16)
}

/// Bisection on `α ∈ [1e-2, 1e2]` to the limit of the floating-point
/// format, followed by certification against the ground-state identities.
pub fn solve_ground_state<T: Real>(params: &ModelParams<T>, tol: T) -> Result<GroundStateReport<T>> {
    solve_ground_state_with(params, tol, &GroundStateOptions::default())
}

pub fn solve_ground_state_with<T: Real>(
    params: &ModelParams<T>,
    tol: T,
    opts: &GroundStateOptions<T>,
) -> Result<GroundStateReport<T>> {
    let (a_lo, a_hi) = opts.bracket;
    let mut shot = opts.shoot;
    let r_profile = shot.r_max;
    shot.r_max = r_profile + opts.overrun;
    let r0 = shot.r0.unwrap_or_else(|| launch_radius(params, a_hi));
    shot.r0 = Some(r0);
    let grid = graded_grid(r0, shot.h, shot.grading, shot.r_max);
    let fire = |alpha: T| shoot_on_grid(params, alpha, &grid, &shot);
    let side = |o: &ShootOutcome<T>| o.kind != ShootKind::Overshoot;

    // bracket scan on a logarithmic ladder
    let ratio = (a_hi / a_lo).ln() / T::from_usize_exact(opts.scan_points - 1);
    let mut lo: Option<(T, ShootOutcome<T>)> = None;
    let mut hi: Option<(T, ShootOutcome<T>)> = None;
    for k in 0..opts.scan_points {
        let alpha = a_lo * (ratio * T::from_usize_exact(k)).exp();
        let out = fire(alpha)?;
        if side(&out) {
            lo = Some((alpha, out));
        } else if lo.is_some() {
            hi = Some((alpha, out));
            break;
        } else {
            break;
        }
    }
    let (Some(mut lo), Some(mut hi)) = (lo, hi) else {
        return Err(Error::BracketFailure {
            lo: a_lo.to_f64_lossy(),
            hi: a_hi.to_f64_lossy(),
        });
    };

    let mut bisections = 0;
    while bisections < opts.max_bisections {
        let mid = lo.0 + (hi.0 - lo.0) / T::lit(2.0);
        if !(mid > lo.0 && mid < hi.0) {
            break;
        }
        bisections += 1;
        let out = fire(mid)?;
        if side(&out) {
            lo = (mid, out);
        } else {
            hi = (mid, out);
        }
    }

    let profile = assemble_profile(params, &lo.1.profile, &hi.1.profile, r_profile, opts.cut_tol)?;
    let report = certify(profile, bisections)?;
    if !(report.max_residual() <= tol) {
        return Err(Error::NoConvergence(format!(
            "identity residual {} above tolerance {} after {} bisections",
            report.max_residual(),
            tol,
            bisections
        )));
    }
    Ok(report)
}

/// Mean of the bracketing shots where they agree, linear decaying tail
/// beyond.
fn assemble_profile<T: Real>(
    params: &ModelParams<T>,
    lo: &RadialProfile<T>,
    hi: &RadialProfile<T>,
    r_max: T,
    cut_tol: T,
) -> Result<RadialProfile<T>> {
    let common = lo.r.len().min(hi.r.len());
    let two = T::lit(2.0);
    let mut cut = common - 1;
    for i in 0..common {
        let mean = (lo.q[i] + hi.q[i]) / two;
        if (hi.q[i] - lo.q[i]).abs() > cut_tol * mean.abs() || mean <= T::zero() {
            cut = i.saturating_sub(1);
            break;
        }
    }
    let alpha = (lo.alpha + hi.alpha) / two;
    let q_cut = (lo.q[cut] + hi.q[cut]) / two;
    if !(q_cut < T::lit(1e-3) * alpha) || cut < 5 {
        return Err(Error::NoConvergence(format!(
            "bracketing shots separate at r = {} while Q = {} (alpha = {})",
            lo.r[cut], q_cut, alpha
        )));
    }
    let mut r: Vec<T> = lo.r[..=cut].to_vec();
    let mut q: Vec<T> = (0..=cut).map(|i| (lo.q[i] + hi.q[i]) / two).collect();
    let mut dq: Vec<T> = (0..=cut).map(|i| (lo.dq[i] + hi.dq[i]) / two).collect();

    // tail radii continue the uniform spacing up to r_max
    let h = lo.r[cut] - lo.r[cut - 1];
    let r_cut = lo.r[cut];
    let mut k = 1usize;
    loop {
        let next = r_cut + T::from_usize_exact(k) * h;
        if next > r_max + h / two {
            break;
        }
        r.push(next);
        k += 1;
    }
    let tail_r = &r[cut..];
    let (t, dt) = decaying_mode(params, tail_r)?;
    let scale = q_cut / t[0];
    for i in 1..tail_r.len() {
        q.push(scale * t[i]);
        dq.push(scale * dt[i]);
    }
    let mut profile = RadialProfile::from_parts(*params, r, q, dq)?;
    profile.alpha = alpha;
    Ok(profile)
}

/// Decaying solution of `T'' + (N-1)/r T' - T = 0` at increasing radii,
/// integrated backwards from well beyond the last radius (the decaying mode
/// dominates in that direction).
fn decaying_mode<T: Real>(params: &ModelParams<T>, radii: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let n1 = params.dim() - T::one();
    let rhs = |r: T, y: &[T; 2]| [y[1], y[0] - n1 / r * y[1]];
    let far = *radii.last().expect("non-empty") + T::lit(15.0);
    let mut y = [T::one(), -(T::one() + n1 / (T::lit(2.0) * far))];
    let mut ode = Dopri5::new(Dopri5Options {
        rtol: T::lit(1e-12),
        atol: T::zero(),
        ..Dopri5Options::default()
    });
    let mut x = far;
    let mut t = vec![T::zero(); radii.len()];
    let mut dt = vec![T::zero(); radii.len()];
    for i in (0..radii.len()).rev() {
        y = ode.integrate(&rhs, x, y, radii[i])?;
        x = radii[i];
        t[i] = y[0];
        dt[i] = y[1];
    }
    Ok((t, dt))
}

fn certify<T: Real>(mut profile: RadialProfile<T>, bisections: usize) -> Result<GroundStateReport<T>> {
    let params = profile.params;
    let l2 = profile.l2_sq();
    let grad = profile.grad_sq();
    let pot = profile.potential(&params);
    let (res9, res10, res16) = residuals_from_norms(&params, l2, grad, pot);
    profile.residual = res9.max(res10).max(res16);
    let eq_res = equation_residual(&profile, T::lit(0.1));
    Ok(GroundStateReport {
        kopt: kopt(&params, l2.sqrt())?,
        l2_sq: l2,
        grad_sq: grad,
        pot,
        eq_res,
        pohozaev_res: (res9, res10),
        energy_res: res16,
        bisections,
        profile,
    })
}

/// Largest pointwise residual of the radial equation for `r >= r_min`,
/// with `Q''` from five-point differences of the samples.
pub fn equation_residual<T: Real>(profile: &RadialProfile<T>, r_min: T) -> T {
    let p = &profile.params;
    let n1 = p.dim() - T::one();
    let start = profile.r.iter().position(|&r| r >= r_min).unwrap_or(profile.r.len());
    if profile.r.len() - start < 5 {
        return T::zero();
    }
    let lo = start.saturating_sub(2);
    let d2 = fd_derivative(&profile.r[lo..], &profile.q[lo..], 2);
    let two_sigma = T::lit(2.0) * p.sigma;
    (start..profile.r.len())
        .map(|i| {
            let (r, q) = (profile.r[i], profile.q[i]);
            let nl = p.coupling * r.powf(-p.b) * q.abs().powf(two_sigma) * q;
            (d2[i - lo] + n1 / r * profile.dq[i] - q + nl).abs()
        })
        .fold(T::zero(), T::max)
}

/// Checks the profile invariants: positivity, monotone decay, and a far
/// tail below `1e-8 α`.
pub fn check_profile<T: Real>(profile: &RadialProfile<T>) -> Result<()> {
    if profile.q.iter().any(|&q| !(q > T::zero())) {
        return Err(Error::InvalidArgument("profile is not positive".into()));
    }
    if profile.q.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("profile is not non-increasing".into()));
    }
    let last = *profile.q.last().expect("non-empty");
    if !(last < T::lit(1e-8) * profile.alpha) {
        return Err(Error::InvalidArgument(format!(
            "profile tail {last} not below 1e-8 alpha"
        )));
    }
    Ok(())
}

/// Samples `Q(|x|)` on the Cartesian grid with monotone cubic interpolation.
pub fn radialize<T: Real>(profile: &RadialProfile<T>, grid: &GridSpec<T>) -> Result<FieldState<T>> {
    if grid.n != profile.params.n {
        return Err(Error::InvalidGrid(format!(
            "grid dimension {} differs from profile dimension {}",
            grid.n, profile.params.n
        )));
    }
    let support = profile.support_radius(T::lit(1e-10));
    if grid.half_width < support {
        return Err(Error::DomainTooSmall(format!(
            "half width {} below profile support radius {}",
            grid.half_width, support
        )));
    }
    FieldState::from_fn(*grid, |x| {
        let r = x.iter().fold(T::zero(), |acc, &c| acc + c * c).sqrt();
        Complex::new(profile.eval(r), T::zero())
    })
}
