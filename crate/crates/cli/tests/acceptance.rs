//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that the lines reach stdout in
//! order; the process exits nonzero if any criterion fails.

use std::fmt::Write as _;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use inlslab::dichotomy::{classify, gradient_quantity, Verdict};
use inlslab::evolution::{evolve, virial_bound_time, Outcome};
use inlslab::functional::energy;
use inlslab::groundstate::{radialize, solve_ground_state, solve_ground_state_with, GroundStateOptions};
use inlslab::{EvolveConfig, FieldState, GridSpec, GroundStateReport, ModelParams, Trajectory};
use inlslab_cli::suites::{barrier_suite, gagliardo_nirenberg_suite, lemma_suite, pohozaev_suite, scalar_suite, SuiteResult};
use num_complex::Complex;

struct Line {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Line {
    Line { passed, detail }
}

fn failed(detail: impl Into<String>) -> Line {
    verdict(false, detail.into())
}

/// The 27 parameter sets: N ∈ {1,2,3}, b ∈ {0.25, 0.5, 0.9 min(2,N)}, and
/// three supercritical σ per (N, b).
fn sweep_params() -> Vec<ModelParams> {
    let mut out = Vec::new();
    for n in 1..=3usize {
        let nf = n as f64;
        for b in [0.25, 0.5, 0.9 * nf.min(2.0)] {
            let lo = (2.0 - b) / nf;
            let sigmas: Vec<f64> = if n <= 2 {
                [1.5, 2.0, 3.0].iter().map(|f| f * lo).collect()
            } else {
                let hi = (2.0 - b) / (nf - 2.0);
                [0.25, 0.5, 0.75].iter().map(|f| lo + f * (hi - lo)).collect()
            };
            for s in sigmas {
                out.push(ModelParams::new(n, s, b).expect("supercritical set"));
            }
        }
    }
    out
}

fn label(p: &ModelParams) -> String {
    format!("(N={}, b={}, σ={:.4})", p.n, p.b, p.sigma)
}

fn criterion_1() -> Line {
    let mut worst_err: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    for sigma in [1.0f64, 2.0, 3.0] {
        let p = ModelParams::new(1, sigma, 0.0).unwrap();
        let t0 = Instant::now();
        let gs = match solve_ground_state(&p, 1e-6) {
            Ok(g) => g,
            Err(e) => return failed(format!("σ = {sigma}: {e}")),
        };
        worst_time = worst_time.max(t0.elapsed().as_secs_f64());
        let exact = |x: f64| ((sigma + 1.0) / (sigma * x).cosh().powi(2)).powf(1.0 / (2.0 * sigma));
        let mut err = (gs.profile.eval(0.0) - exact(0.0)).abs();
        for (&r, &q) in gs.profile.r.iter().zip(&gs.profile.q) {
            if r <= 20.0 {
                err = err.max((q - exact(r)).abs());
            }
        }
        let mut r = 0.0;
        while r <= 20.0 {
            err = err.max((gs.profile.eval(r) - exact(r)).abs());
            r += 1e-3;
        }
        worst_err = worst_err.max(err);
    }
    verdict(
        worst_err <= 1e-6 && worst_time < 5.0,
        format!("max |Q - Q_exact| on [0, 20] = {worst_err:.2e} (<= 1e-6), slowest solve {worst_time:.2} s (< 5 s)"),
    )
}

fn criterion_2(sets: &[(ModelParams, GroundStateReport)], elapsed: f64, failures: &[String]) -> Line {
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for (p, gs) in sets {
        let suite = pohozaev_suite(gs);
        let w = suite.checks.iter().map(|c| c.value).fold(0.0, f64::max);
        if w > worst {
            worst = w;
            at = label(p);
        }
    }
    let ok = failures.is_empty() && worst <= 1e-5 && elapsed < 120.0;
    let mut d = format!(
        "{} sets, max relative residual {worst:.2e} at {at} (<= 1e-5), {elapsed:.1} s (< 120 s)",
        sets.len()
    );
    for f in failures {
        let _ = write!(d, "; {f}");
    }
    verdict(ok, d)
}

fn worst_check(suites: &[(String, SuiteResult)], idx: usize, better_low: bool) -> (f64, String) {
    let mut best: Option<(f64, String)> = None;
    for (name, s) in suites {
        let v = s.checks[idx].value;
        let worse = match &best {
            None => true,
            Some((b, _)) => (better_low && v > *b) || (!better_low && v < *b),
        };
        if worse {
            best = Some((v, name.clone()));
        }
    }
    best.unwrap_or((f64::NAN, String::new()))
}

fn criterion_3(sets: &[(ModelParams, GroundStateReport)]) -> Line {
    let mut suites = Vec::new();
    for (k, (p, gs)) in sets.iter().enumerate() {
        match gagliardo_nirenberg_suite(p, gs, 1000, 42 + k as u64) {
            Ok(s) => suites.push((label(p), s)),
            Err(e) => return failed(format!("{}: {e}", label(p))),
        }
    }
    let ok = suites.iter().all(|(_, s)| s.passed);
    let (kdev, kat) = worst_check(&suites, 0, true);
    let (margin, mat) = worst_check(&suites, 1, false);
    verdict(
        ok,
        format!(
            "max |J(Q) K_opt - 1| = {kdev:.2e} at {kat} (<= 1e-4); min J(u) - 1/K_opt over 1000 fields per set = {margin:.2e} at {mat} (>= -1e-6)"
        ),
    )
}

fn criterion_4(sets: &[(ModelParams, GroundStateReport)]) -> Line {
    let mut suites = Vec::new();
    for (p, gs) in sets {
        match barrier_suite(p, gs) {
            Ok(s) => suites.push((label(p), s)),
            Err(e) => return failed(format!("{}: {e}", label(p))),
        }
    }
    let ok = suites.iter().all(|(_, s)| s.passed);
    let (slope, _) = worst_check(&suites, 0, true);
    let (root, _) = worst_check(&suites, 2, true);
    let (ratio, _) = worst_check(&suites, 3, true);
    verdict(
        ok,
        format!("max |f'(x_max)|/x_max = {slope:.2e} (<= 1e-6), max |f(x_root)| = {root:.2e} (<= 1e-8), max ratio deviation = {ratio:.1e}"),
    )
}

fn criterion_5() -> Line {
    let t0 = Instant::now();
    let lemma = match lemma_suite(200, 1000, 42) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let scalar = match scalar_suite(10_000) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        lemma.passed && scalar.passed && secs < 10.0,
        format!(
            "min f - p over 200 x 1000 = {:.2e} (>= -1e-12); scalar minima {:.2e}, {:.2e} (> 0) on 1e4 points; {secs:.2} s (< 10 s)",
            lemma.checks[0].value, scalar.checks[0].value, scalar.checks[1].value
        ),
    )
}

fn soliton_drifts(dt: f64) -> inlslab::Result<(f64, f64)> {
    let p = ModelParams::new(1, 1.0, 0.0)?;
    let grid = GridSpec::new(1, 20.0, 1024)?;
    let u0 = FieldState::from_fn(grid, |x| Complex::new(2f64.sqrt() / x[0].cosh(), 0.0))?;
    let mut cfg = EvolveConfig::new(dt, 1.0);
    cfg.record_every = usize::MAX;
    cfg.boundary_tol = 1e-8;
    let tr = evolve(&u0, &p, &cfg)?;
    let (a, b) = (tr.records[0], *tr.records.last().unwrap());
    Ok((((b.mass - a.mass) / a.mass).abs(), ((b.energy - a.energy) / a.energy).abs()))
}

fn criterion_6() -> Line {
    let (m1, e1) = match soliton_drifts(1e-4) {
        Ok(v) => v,
        Err(e) => return failed(e.to_string()),
    };
    let (_, e2) = match soliton_drifts(5e-5) {
        Ok(v) => v,
        Err(e) => return failed(e.to_string()),
    };
    let ratio = e1 / e2;
    verdict(
        m1 <= 1e-12 && e1 <= 1e-6 && (3.5..=4.5).contains(&ratio),
        format!("mass drift {m1:.2e} (<= 1e-12), energy drift {e1:.2e} (<= 1e-6), drift ratio dt/(dt/2) = {ratio:.3} (in [3.5, 4.5])"),
    )
}

/// The `0.9 Q` run shared by criteria 7 and 8.
struct GlobalRun {
    params: ModelParams,
    gs: GroundStateReport,
    u0: FieldState,
    traj: Trajectory,
}

fn global_run() -> inlslab::Result<GlobalRun> {
    let params = ModelParams::new(1, 3.0, 0.5)?;
    let gs = solve_ground_state(&params, 1e-6)?;
    let u0 = radialize(&gs.profile.scaled(0.9), &GridSpec::new(1, 128.0, 8192)?)?;
    let mut cfg = EvolveConfig::new(1e-4, 2.0);
    cfg.record_every = 100;
    cfg.boundary_tol = 1e-3;
    let traj = evolve(&u0, &params, &cfg)?;
    Ok(GlobalRun { params, gs, u0, traj })
}

fn criterion_7(run: &GlobalRun) -> Line {
    let r = &run.traj.records;
    if run.traj.outcome != Outcome::CompletedT || r.len() < 5 {
        return failed(format!("run ended with {:?} after {} records", run.traj.outcome, r.len()));
    }
    let h = r[1].t - r[0].t;
    // V''' from the recorded V'' = virial_rhs; a centered difference errs by h²/6 V'''
    let max_v3 = r
        .windows(3)
        .map(|w| ((w[2].virial_rhs - w[0].virial_rhs) / (2.0 * h)).abs())
        .fold(0.0, f64::max);
    let bound = 2.0 * h * h / 6.0 * max_v3 + 1e-6;
    let (mut worst_first, mut worst_second) = (0.0f64, 0.0f64);
    for w in r.windows(3) {
        let d1 = (w[2].variance - w[0].variance) / (2.0 * h);
        let d2 = (w[2].variance - 2.0 * w[1].variance + w[0].variance) / (h * h);
        worst_first = worst_first.max((d1 - w[1].variance_rate).abs());
        worst_second = worst_second.max(((d2 - w[1].virial_rhs) / w[1].virial_rhs).abs());
    }
    verdict(
        worst_first <= bound && worst_second <= 1e-2,
        format!(
            "record spacing {h:.0e}: max |ΔV/Δt - V'| = {worst_first:.2e} (<= 2·Δ²/6·max|V'''| + 1e-6 = {bound:.2e}); max |Δ²V/Δt² - rhs|/|rhs| = {worst_second:.2e} (<= 1e-2)"
        ),
    )
}

fn criterion_8(run: &GlobalRun) -> Line {
    let t0 = Instant::now();
    let p = &run.params;
    let s = p.s_sigma();
    let glob = match classify(&run.u0, p, &run.gs, true) {
        Ok(r) => r,
        Err(e) => return failed(format!("classify 0.9Q: {e}")),
    };
    let m0 = run.traj.records[0].mass;
    let g_max = run
        .traj
        .records
        .iter()
        .map(|r| gradient_quantity(r.grad_sq, m0, s))
        .fold(0.0, f64::max);
    let trapped = glob.verdict == Verdict::Global && g_max < glob.g_q;

    let blow = (|| -> inlslab::Result<(Verdict, f64, Outcome<f64>, Option<f64>)> {
        let p2 = ModelParams::new(2, 1.0, 0.5)?;
        let gs2 = solve_ground_state(&p2, 1e-6)?;
        let u0 = FieldState::gaussian(GridSpec::new(2, 8.0, 1024)?, 2.2, 1.0, 0.0)?;
        let rep = classify(&u0, &p2, &gs2, true)?;
        let e0 = energy(&u0, &p2)?;
        let mut cfg = EvolveConfig::new(1e-3, 1.0);
        cfg.adapt = true;
        cfg.record_every = 10;
        cfg.blowup_grad_factor = 100.0;
        cfg.boundary_tol = 1e-2;
        let tr = evolve(&u0, &p2, &cfg)?;
        let r0 = tr.records[0];
        let bound = virial_bound_time(r0.variance, r0.variance_rate, r0.energy, &p2);
        Ok((rep.verdict, e0, tr.outcome, bound))
    })();
    let secs = t0.elapsed().as_secs_f64();
    let (v2, e0, outcome, bound) = match blow {
        Ok(v) => v,
        Err(e) => return failed(format!("0.9Q: {:?}, g max {g_max:.4} vs g(Q) {:.4}; gaussian: {e}", glob.verdict, glob.g_q)),
    };
    let detected = match (outcome, bound) {
        (Outcome::BlowUpDetected { t_detect }, Some(b)) | (Outcome::StepFloorHit { t: t_detect }, Some(b)) => Some((t_detect, b)),
        _ => None,
    };
    let ok = trapped && v2 == Verdict::BlowUp && detected.is_some_and(|(t, b)| t <= b) && secs < 120.0;
    let det = match detected {
        Some((t, b)) => format!("t_detect {t:.4} <= virial bound {b:.4}"),
        None => format!("outcome {outcome:?}, bound {bound:?}"),
    };
    verdict(
        ok,
        format!(
            "0.9Q: {:?}, max g(u(t)) = {g_max:.4} < g(Q) = {:.4}; Gaussian (E0 = {e0:.3}): {v2:?}, {det}; {secs:.1} s (< 120 s)",
            glob.verdict, glob.g_q
        ),
    )
}

fn criterion_9() -> Line {
    let dir = std::env::temp_dir().join(format!("inlslab-acceptance-{}", std::process::id()));
    if let Err(e) = fs::create_dir_all(&dir) {
        return failed(e.to_string());
    }
    let cfg = dir.join("verify.cfg");
    if let Err(e) = fs::write(&cfg, "N = 1\nsigma = 3\nb = 0.5\noutput_dir = out\n") {
        return failed(e.to_string());
    }
    let mut reports = Vec::new();
    for _ in 0..2 {
        let out = Command::new(env!("CARGO_BIN_EXE_inlslab"))
            .args(["verify", "--seed", "42", "--config"])
            .arg(&cfg)
            .output();
        match out {
            Ok(o) if o.status.success() => {}
            Ok(o) => return failed(format!("verify exited with {}: {}", o.status, String::from_utf8_lossy(&o.stderr))),
            Err(e) => return failed(e.to_string()),
        }
        match fs::read(dir.join("out/verify.json")) {
            Ok(bytes) => reports.push(bytes),
            Err(e) => return failed(e.to_string()),
        }
    }
    let _ = fs::remove_dir_all(&dir);
    let same = reports[0] == reports[1];
    verdict(same, format!("two `verify --seed 42` reports ({} bytes) byte-identical: {same}", reports[0].len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Line)> = Vec::new();
    let mut report = |n: usize, name: &'static str, o: Line| {
        println!("criterion {n} [{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };

    report(1, "soliton oracle", criterion_1());

    let t0 = Instant::now();
    let mut sets = Vec::new();
    let mut failures = Vec::new();
    // ladder over alpha in [1e-8, 1e2]
    let wide = GroundStateOptions {
        bracket: (1e-8, 1e2),
        scan_points: 101,
        ..GroundStateOptions::default()
    };
    for p in sweep_params() {
        match solve_ground_state_with(&p, 1e-5, &wide) {
            Ok(gs) => sets.push((p, gs)),
            Err(e) => failures.push(format!("{}: {e}", label(&p))),
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report(2, "Pohozaev certification", criterion_2(&sets, elapsed, &failures));
    report(3, "sharp-constant consistency", criterion_3(&sets));
    report(4, "barrier geometry", criterion_4(&sets));
    report(5, "lemma suite", criterion_5());
    report(6, "conservation", criterion_6());
    match global_run() {
        Ok(run) => {
            report(7, "virial identities", criterion_7(&run));
            report(8, "dichotomy end-to-end", criterion_8(&run));
        }
        Err(e) => {
            report(7, "virial identities", failed(format!("0.9Q run: {e}")));
            report(8, "dichotomy end-to-end", failed(format!("0.9Q run: {e}")));
        }
    }
    report(9, "determinism", criterion_9());

    let failed_count = results.iter().filter(|(_, _, o)| !o.passed).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed_count, results.len());
    if failed_count == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
