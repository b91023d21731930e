//! Self-checks run by `inlslab verify`.
//!
//! Each suite returns named checks of the form `value <= limit` or
//! `value >= limit`. Randomized suites draw everything from a ChaCha8
//! stream seeded by the caller before any parallel work starts, so the
//! results do not depend on the thread count.

use std::fmt::Write as _;

use inlslab::dichotomy::{
    lemma51_gap, lemma51_normalized_constants, lemma51_scalar_inequalities, section5_barrier, trap_constant,
    PowerBarrier,
};
use inlslab::functional::weinstein;
use inlslab::groundstate::pohozaev_check;
use inlslab::radial::graded_grid;
use inlslab::{GroundStateReport, ModelParams, RadialProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Context, Result};

pub const POHOZAEV_TOL: f64 = 1e-5;
pub const KOPT_TOL: f64 = 1e-4;
pub const GN_MARGIN: f64 = 1e-6;
pub const LEMMA_TOL: f64 = 1e-12;
pub const BARRIER_SLOPE_TOL: f64 = 1e-6;
pub const BARRIER_ROOT_TOL: f64 = 1e-8;
pub const RATIO_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub op: &'static str,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            op: "<=",
            limit,
            passed: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            op: ">=",
            limit,
            passed: value >= limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteResult {
    fn new(name: &'static str, checks: Vec<Check>) -> Self {
        Self {
            name,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

/// Relative residuals of the three ground-state identities.
pub fn pohozaev_suite(gs: &GroundStateReport) -> SuiteResult {
    let (grad, pot, energy) = pohozaev_check(&gs.profile);
    SuiteResult::new(
        "pohozaev",
        vec![
            Check::at_most("gradient identity residual", grad, POHOZAEV_TOL),
            Check::at_most("potential identity residual", pot, POHOZAEV_TOL),
            Check::at_most("energy identity residual", energy, POHOZAEV_TOL),
        ],
    )
}

/// Smooth radial trial field with an analytic derivative.
#[derive(Debug, Clone, Copy)]
enum Trial {
    /// `Σ c_k (1 + d_k r²) exp(-r²/(2 w_k²))`, `w_0 = 1`.
    Mixture { c: [f64; 3], d: [f64; 3], w: [f64; 3] },
    /// `Q(r) (1 + ε (a exp(-r²/(2 ρ²)) + c r²/(1 + r²)))`.
    Perturbed { eps: f64, a: f64, rho: f64, c: f64 },
}

fn draw_trial(rng: &mut ChaCha8Rng, k: usize) -> Trial {
    if k.is_multiple_of(2) {
        let mut c = [0.0; 3];
        let mut d = [0.0; 3];
        let mut w = [1.0; 3];
        c[0] = rng.gen_range(0.5..1.5);
        d[0] = rng.gen_range(0.0..1.0);
        let extra = rng.gen_range(0..3);
        for j in 1..=extra {
            c[j] = rng.gen_range(-1.0..1.0);
            d[j] = rng.gen_range(0.0..1.0);
            w[j] = rng.gen_range(0.2f64.ln()..5f64.ln()).exp();
        }
        Trial::Mixture { c, d, w }
    } else {
        Trial::Perturbed {
            eps: rng.gen_range(1e-3f64.ln()..0.3f64.ln()).exp(),
            a: rng.gen_range(-1.0..1.0),
            rho: rng.gen_range(0.3..3.0),
            c: rng.gen_range(-1.0..1.0),
        }
    }
}

fn trial_profile(trial: &Trial, params: ModelParams, q: &RadialProfile) -> inlslab::Result<RadialProfile> {
    match *trial {
        Trial::Mixture { c, d, w } => {
            let w_min = w.iter().zip(&c).filter(|(_, &ck)| ck != 0.0).map(|(&wk, _)| wk).fold(f64::INFINITY, f64::min);
            let w_max = w.iter().zip(&c).filter(|(_, &ck)| ck != 0.0).map(|(&wk, _)| wk).fold(0.0, f64::max);
            let r = graded_grid(1e-6, w_min / 60.0, 1e-2, 12.0 * w_max);
            let mut val = vec![0.0; r.len()];
            let mut der = vec![0.0; r.len()];
            for (i, &x) in r.iter().enumerate() {
                for k in 0..3 {
                    if c[k] == 0.0 {
                        continue;
                    }
                    let g = (-x * x / (2.0 * w[k] * w[k])).exp();
                    let poly = 1.0 + d[k] * x * x;
                    val[i] += c[k] * poly * g;
                    der[i] += c[k] * g * (2.0 * d[k] * x - poly * x / (w[k] * w[k]));
                }
            }
            RadialProfile::from_parts(params, r, val, der)
        }
        Trial::Perturbed { eps, a, rho, c } => {
            let mut val = Vec::with_capacity(q.r.len());
            let mut der = Vec::with_capacity(q.r.len());
            for ((&x, &qv), &dq) in q.r.iter().zip(&q.q).zip(&q.dq) {
                let g = (-x * x / (2.0 * rho * rho)).exp();
                let s = 1.0 + x * x;
                let m = 1.0 + eps * (a * g + c * x * x / s);
                let dm = eps * (-a * g * x / (rho * rho) + c * 2.0 * x / (s * s));
                val.push(qv * m);
                der.push(dq * m + qv * dm);
            }
            RadialProfile::from_parts(params, q.r.clone(), val, der)
        }
    }
}

/// `J(Q) K_opt = 1` and `J(u) >= 1/K_opt` on random smooth radial fields.
pub fn gagliardo_nirenberg_suite(params: &ModelParams, gs: &GroundStateReport, trials: usize, seed: u64) -> Result<SuiteResult> {
    let jq = weinstein(&gs.profile, params).context("J(Q)")?;
    let inv_k = 1.0 / gs.kopt;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Trial> = (0..trials).map(|k| draw_trial(&mut rng, k)).collect();
    let margins: Vec<inlslab::Result<f64>> = draws
        .par_iter()
        .map(|t| {
            let u = trial_profile(t, *params, &gs.profile)?;
            Ok(weinstein(&u, params)? - inv_k)
        })
        .collect();
    let mut worst = f64::INFINITY;
    for m in margins {
        worst = worst.min(m.context("trial field")?);
    }
    let mut checks = vec![Check::at_most("|J(Q) K_opt - 1|", (jq * gs.kopt - 1.0).abs(), KOPT_TOL)];
    if trials > 0 {
        checks.push(Check::at_least(format!("min J(u) - 1/K_opt over {trials} fields"), worst, -GN_MARGIN));
    }
    Ok(SuiteResult::new("gagliardo_nirenberg", checks))
}

/// `f - p >= 0` between the peak and the root of `½x² - a x^α`, for
/// random `a ∈ [0.5, 5]` (log-uniform) and `α ∈ [2.05, 10]`.
pub fn lemma_suite(pairs: usize, samples: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64)> = (0..pairs)
        .map(|_| (rng.gen_range(0.5f64.ln()..5f64.ln()).exp(), rng.gen_range(2.05..10.0)))
        .collect();
    let per_pair: Vec<inlslab::Result<(f64, f64)>> = draws
        .par_iter()
        .map(|&(a, alpha)| {
            let f = PowerBarrier::new(a, alpha)?;
            let (lo, hi) = (f.x_max(), f.x_root());
            let mut worst = f64::INFINITY;
            for j in 0..samples {
                let t = if samples > 1 { j as f64 / (samples - 1) as f64 } else { 0.5 };
                let x = (lo + t * (hi - lo)).clamp(lo, hi);
                worst = worst.min(lemma51_gap(a, alpha, x)?);
            }
            let (peak, root) = lemma51_normalized_constants(alpha)?;
            Ok((worst, peak.min(root - 1.0)))
        })
        .collect();
    let (mut gap, mut consts) = (f64::INFINITY, f64::INFINITY);
    for r in per_pair {
        let (g, c) = r.context("barrier sample")?;
        gap = gap.min(g);
        consts = consts.min(c);
    }
    Ok(SuiteResult::new(
        "lemma",
        vec![
            Check::at_least(format!("min f - p over {pairs} x {samples} samples"), gap, -LEMMA_TOL),
            Check::at_least("min of normalized peak and root excess", consts, 0.0),
        ],
    ))
}

/// Both scalar inequalities on log-spaced `x ∈ [1e-6, 1e6]`.
pub fn scalar_suite(points: usize) -> Result<SuiteResult> {
    let (lo, hi) = (1e-6f64.ln(), 1e6f64.ln());
    let (mut first, mut second) = (f64::INFINITY, f64::INFINITY);
    for j in 0..points {
        let x = (lo + (hi - lo) * j as f64 / (points - 1) as f64).exp();
        let (a, b) = lemma51_scalar_inequalities(x).context("scalar inequality")?;
        first = first.min(a);
        second = second.min(b);
    }
    Ok(SuiteResult::new(
        "scalar_inequalities",
        vec![
            Check::at_least("min (1 + (x+2)^(-1/2))^x - (x+2)/2", first, 0.0),
            Check::at_least("min (1+x)^(1/(2x)+1)((1+x)^(1/(2x)) - 1) - 1", second, 0.0),
        ],
    ))
}

/// Peak, root and root/peak ratio of the mass-scaled energy barrier.
pub fn barrier_suite(params: &ModelParams, gs: &GroundStateReport) -> Result<SuiteResult> {
    let bar = section5_barrier(params, gs).context("barrier")?;
    let c = trap_constant(params).context("trap constant")?;
    let nsb = params.n as f64 * params.sigma + params.b;
    let formula = (nsb / 2.0).powf(1.0 / (nsb - 2.0));
    let ratio = bar.x_root / bar.x_max;
    Ok(SuiteResult::new(
        "barrier",
        vec![
            Check::at_most("|f'(x_max)| / x_max", (bar.derivative(bar.x_max) / bar.x_max).abs(), BARRIER_SLOPE_TOL),
            Check::at_most(
                "|f(x_max) / (E[Q] M[Q]^((1-s)/s)) - 1|",
                (bar.eval(bar.x_max) / bar.f_at_x_max - 1.0).abs(),
                BARRIER_SLOPE_TOL,
            ),
            Check::at_most("|f(x_root)|", bar.eval(bar.x_root).abs(), BARRIER_ROOT_TOL),
            Check::at_most("|x_root/x_max / ((Nσ+b)/2)^(1/(Nσ+b-2)) - 1|", (ratio / formula - 1.0).abs(), RATIO_TOL),
            Check::at_most("|trap constant / ((Nσ+b)/2)^(1/(Nσ+b-2)) - 1|", (c / formula - 1.0).abs(), RATIO_TOL),
        ],
    ))
}

/// Fixed-width pass/fail table.
pub fn render_table(suites: &[SuiteResult]) -> String {
    let mut out = String::new();
    for s in suites {
        let _ = writeln!(out, "{:<20} {}", s.name, if s.passed { "PASS" } else { "FAIL" });
        for c in &s.checks {
            let _ = writeln!(
                out,
                "  {:<4} {:<52} {:>12.4e} {} {:.1e}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.value,
                c.op,
                c.limit
            );
        }
    }
    out
}
