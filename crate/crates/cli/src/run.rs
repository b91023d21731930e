//! Mode dispatch and report assembly.

use std::path::PathBuf;

use inlslab::dichotomy::{classify, Verdict};
use inlslab::evolution::{evolve, virial_bound_time, Outcome};
use inlslab::functional::{energy, weinstein};
use inlslab::groundstate::{radialize, solve_ground_state_with, GroundStateOptions};
use inlslab::{FieldState, Functional, GridSpec, GroundStateReport, ModelParams, ThresholdReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{InitialData, Mode, RunConfig, SweepCase, VerifySettings};
use crate::error::{CliError, Context, Result};
use crate::output::{profile_csv, read_profile, to_json, trajectory_csv, write_file};
use crate::suites::{
    barrier_suite, gagliardo_nirenberg_suite, lemma_suite, pohozaev_suite, render_table, scalar_suite, SuiteResult,
};

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Human-readable table (verify only).
    pub table: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamsOut {
    #[serde(rename = "N")]
    pub n: usize,
    pub sigma: f64,
    pub b: f64,
    pub s_sigma: f64,
}

impl From<&ModelParams> for ParamsOut {
    fn from(p: &ModelParams) -> Self {
        Self {
            n: p.n,
            sigma: p.sigma,
            b: p.b,
            s_sigma: p.s_sigma(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub equation: f64,
    pub gradient_identity: f64,
    pub potential_identity: f64,
    pub energy_identity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateOut {
    pub mode: Mode,
    pub params: ParamsOut,
    pub alpha: f64,
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub potential: f64,
    pub energy: f64,
    pub kopt: f64,
    pub weinstein_kopt: f64,
    pub residuals: Residuals,
    pub bisections: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyOut {
    pub mode: Mode,
    pub params: ParamsOut,
    pub initial_data: InitialData,
    pub mass: f64,
    pub energy: f64,
    pub grad_sq: f64,
    pub me_u: f64,
    pub me_q: f64,
    pub g_u: f64,
    pub g_q: f64,
    pub finite_variance: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveOut {
    pub mode: Mode,
    pub params: ParamsOut,
    pub grid: GridSpec,
    pub config: inlslab::EvolveConfig,
    pub initial_data: InitialData,
    pub outcome: Outcome<f64>,
    pub steps: usize,
    pub records: usize,
    pub t_end: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub virial_bound_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOut {
    pub mode: Mode,
    pub seed: u64,
    pub params: ParamsOut,
    pub settings: VerifySettings,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub case: SweepCase,
    pub s_sigma: f64,
    pub me_u: f64,
    pub me_q: f64,
    pub g_u: f64,
    pub g_q: f64,
    pub verdict: Verdict,
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    match cfg.mode {
        Mode::Groundstate => run_groundstate(cfg),
        Mode::Classify => run_classify(cfg),
        Mode::Evolve => run_evolve(cfg),
        Mode::Verify => run_verify(cfg),
        Mode::Sweep => run_sweep(cfg),
    }
}

fn params_of(cfg: &RunConfig) -> Result<ModelParams> {
    cfg.params.ok_or_else(|| CliError::validation("N", "missing"))
}

fn ground_state(params: &ModelParams, cfg: &RunConfig) -> Result<GroundStateReport> {
    let (lo, hi) = cfg.alpha_range;
    let decades = (hi / lo).log10();
    let opts = GroundStateOptions {
        bracket: (lo, hi),
        scan_points: 41.max((10.0 * decades).ceil() as usize + 1),
        ..GroundStateOptions::default()
    };
    solve_ground_state_with(params, cfg.tol, &opts).context("ground state")
}

fn emit(summary: &mut RunSummary, cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
    let path = cfg.output_dir.join(name);
    write_file(&path, contents)?;
    summary.files.push(path);
    Ok(())
}

pub fn ground_state_out(params: &ModelParams, gs: &GroundStateReport) -> Result<GroundStateOut> {
    let energy_q = energy(&gs.profile, params).context("E[Q]")?;
    let j = weinstein(&gs.profile, params).context("J(Q)")?;
    let (gradient_identity, potential_identity, energy_identity) = (gs.pohozaev_res.0, gs.pohozaev_res.1, gs.energy_res);
    Ok(GroundStateOut {
        mode: Mode::Groundstate,
        params: params.into(),
        alpha: gs.alpha(),
        l2_sq: gs.l2_sq,
        grad_sq: gs.grad_sq,
        potential: gs.pot,
        energy: energy_q,
        kopt: gs.kopt,
        weinstein_kopt: j * gs.kopt,
        residuals: Residuals {
            equation: gs.eq_res,
            gradient_identity,
            potential_identity,
            energy_identity,
        },
        bisections: gs.bisections,
        samples: gs.profile.r.len(),
    })
}

fn run_groundstate(cfg: &RunConfig) -> Result<RunSummary> {
    let params = params_of(cfg)?;
    let gs = ground_state(&params, cfg)?;
    let mut summary = RunSummary {
        passed: true,
        ..Default::default()
    };
    emit(&mut summary, cfg, "profile.csv", &profile_csv(&gs.profile))?;
    emit(&mut summary, cfg, "report.json", &to_json(&ground_state_out(&params, &gs)?))?;
    Ok(summary)
}

/// The data on `grid`, solving for `Q` only when the data need it.
fn initial_field(
    data: &InitialData,
    params: &ModelParams,
    grid: GridSpec,
    gs: Option<&GroundStateReport>,
) -> Result<FieldState> {
    match data {
        InitialData::GroundStateScaled { gamma } => {
            let gs = gs.expect("ground state solved for scaled data");
            radialize(&gs.profile.scaled(*gamma), &grid).context("radialize γQ")
        }
        InitialData::Gaussian {
            amplitude,
            width,
            center,
        } => FieldState::gaussian(grid, *amplitude, *width, *center).context("gaussian data"),
        InitialData::File { path } => {
            let profile = read_profile(path, *params)?;
            radialize(&profile, &grid).context("radialize file profile")
        }
    }
}

fn run_classify(cfg: &RunConfig) -> Result<RunSummary> {
    let params = params_of(cfg)?;
    let data = cfg.initial_data.clone().ok_or_else(|| CliError::validation("initial_data", "missing"))?;
    let gs = ground_state(&params, cfg)?;
    let (report, l2, e, grad) = match &data {
        InitialData::GroundStateScaled { gamma } => measure(&gs.profile.scaled(*gamma), &params, &gs)?,
        InitialData::File { path } => measure(&read_profile(path, params)?, &params, &gs)?,
        InitialData::Gaussian { .. } => {
            let grid = cfg.grid.ok_or_else(|| CliError::validation("L", "gaussian data needs a grid"))?;
            measure(&initial_field(&data, &params, grid, Some(&gs))?, &params, &gs)?
        }
    };
    let out = ClassifyOut {
        mode: Mode::Classify,
        params: (&params).into(),
        initial_data: data,
        mass: l2,
        energy: e,
        grad_sq: grad,
        me_u: report.me_u,
        me_q: report.me_q,
        g_u: report.g_u,
        g_q: report.g_q,
        finite_variance: report.finite_variance,
        verdict: report.verdict,
    };
    let mut summary = RunSummary {
        passed: true,
        ..Default::default()
    };
    emit(&mut summary, cfg, "report.json", &to_json(&out))?;
    Ok(summary)
}

fn measure<U: Functional<f64>>(
    u: &U,
    params: &ModelParams,
    gs: &GroundStateReport,
) -> Result<(ThresholdReport, f64, f64, f64)> {
    let report = classify(u, params, gs, true).context("classify")?;
    let e = energy(u, params).context("energy")?;
    Ok((report, u.l2_sq(), e, u.grad_sq()))
}

fn run_evolve(cfg: &RunConfig) -> Result<RunSummary> {
    let params = params_of(cfg)?;
    let data = cfg.initial_data.clone().ok_or_else(|| CliError::validation("initial_data", "missing"))?;
    let grid = cfg.grid.ok_or_else(|| CliError::validation("L", "missing"))?;
    let ecfg = cfg.evolve_cfg.ok_or_else(|| CliError::validation("dt", "missing"))?;
    let gs = match data {
        InitialData::GroundStateScaled { .. } => Some(ground_state(&params, cfg)?),
        _ => None,
    };
    let u0 = initial_field(&data, &params, grid, gs.as_ref())?;
    let traj = evolve(&u0, &params, &ecfg).context("evolve")?;
    let first = traj.records[0];
    let last = *traj.records.last().expect("at least one record");
    let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
    let out = EvolveOut {
        mode: Mode::Evolve,
        params: (&params).into(),
        grid,
        config: ecfg,
        initial_data: data,
        outcome: traj.outcome,
        steps: traj.steps,
        records: traj.records.len(),
        t_end: last.t,
        mass_drift: rel(last.mass, first.mass),
        energy_drift: rel(last.energy, first.energy),
        virial_bound_time: virial_bound_time(first.variance, first.variance_rate, first.energy, &params),
    };
    let mut summary = RunSummary {
        passed: true,
        ..Default::default()
    };
    emit(&mut summary, cfg, "trajectory.csv", &trajectory_csv(&traj.records))?;
    emit(&mut summary, cfg, "report.json", &to_json(&out))?;
    Ok(summary)
}

/// All verify suites for one parameter set.
pub fn verify_suites(params: &ModelParams, gs: &GroundStateReport, settings: &VerifySettings, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut suites = vec![pohozaev_suite(gs)];
    suites.push(gagliardo_nirenberg_suite(params, gs, settings.gn_trials, seed)?);
    suites.push(lemma_suite(settings.lemma_pairs, settings.lemma_samples, seed.wrapping_add(1))?);
    suites.push(scalar_suite(settings.scalar_points)?);
    if params.supercritical() {
        suites.push(barrier_suite(params, gs)?);
    }
    Ok(suites)
}

fn run_verify(cfg: &RunConfig) -> Result<RunSummary> {
    let params = params_of(cfg)?;
    let gs = ground_state(&params, cfg)?;
    let suites = verify_suites(&params, &gs, &cfg.verify, cfg.seed)?;
    let passed = suites.iter().all(|s| s.passed);
    let table = render_table(&suites);
    let out = VerifyOut {
        mode: Mode::Verify,
        seed: cfg.seed,
        params: (&params).into(),
        settings: cfg.verify,
        passed,
        suites,
    };
    let mut summary = RunSummary {
        table: Some(table),
        passed,
        ..Default::default()
    };
    emit(&mut summary, cfg, "verify.json", &to_json(&out))?;
    Ok(summary)
}

fn run_sweep(cfg: &RunConfig) -> Result<RunSummary> {
    let results: Vec<Result<(SweepEntry, String)>> = cfg
        .cases
        .par_iter()
        .enumerate()
        .map(|(k, case)| {
            let at = |e: CliError| match e {
                CliError::Core { context, source } => CliError::Core {
                    context: format!("case {k}: {context}"),
                    source,
                },
                other => other,
            };
            let params = ModelParams::new(case.n, case.sigma, case.b).context("parameters").map_err(at)?;
            let gs = ground_state(&params, cfg).map_err(at)?;
            let rep = classify(&gs.profile.scaled(case.gamma), &params, &gs, true).context("classify").map_err(at)?;
            let entry = SweepEntry {
                case: *case,
                s_sigma: params.s_sigma(),
                me_u: rep.me_u,
                me_q: rep.me_q,
                g_u: rep.g_u,
                g_q: rep.g_q,
                verdict: rep.verdict,
            };
            Ok((entry, profile_csv(&gs.profile)))
        })
        .collect();
    let mut summary = RunSummary {
        passed: true,
        ..Default::default()
    };
    let mut entries = Vec::with_capacity(results.len());
    for (k, r) in results.into_iter().enumerate() {
        let (entry, csv) = r?;
        emit(&mut summary, cfg, &format!("case_{k:03}/profile.csv"), &csv)?;
        entries.push(entry);
    }
    emit(&mut summary, cfg, "report.json", &to_json(&entries))?;
    Ok(summary)
}
