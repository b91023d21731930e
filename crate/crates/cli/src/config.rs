//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! mode = evolve
//! N = 1
//! sigma = 3
//! b = 0.5
//! L = 64
//! M = 4096
//! dt = 1e-4
//! T = 2
//! initial_data = ground_state_scaled(0.9)
//! output_dir = out/run1
//! ```
//!
//! Every key is validated; unknown or repeated keys are parse errors.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use inlslab::{EvolveConfig, GridSpec, ModelParams};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Groundstate,
    Classify,
    Evolve,
    Verify,
    Sweep,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "groundstate" => Mode::Groundstate,
            "classify" => Mode::Classify,
            "evolve" => Mode::Evolve,
            "verify" => Mode::Verify,
            "sweep" => Mode::Sweep,
            other => return Err(format!("unknown mode '{other}'")),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Groundstate => "groundstate",
            Mode::Classify => "classify",
            Mode::Evolve => "evolve",
            Mode::Verify => "verify",
            Mode::Sweep => "sweep",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `γ·Q` for the model's ground state.
    GroundStateScaled { gamma: f64 },
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// A radial profile in `profile.csv` format.
    File { path: PathBuf },
}

/// One `(N, σ, b, γ)` entry of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCase {
    #[serde(rename = "N")]
    pub n: usize,
    pub sigma: f64,
    pub b: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySettings {
    pub gn_trials: usize,
    pub lemma_pairs: usize,
    pub lemma_samples: usize,
    pub scalar_points: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            gn_trials: 1000,
            lemma_pairs: 200,
            lemma_samples: 1000,
            scalar_points: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    /// Absent only for sweeps, which carry their own parameters.
    pub params: Option<ModelParams>,
    pub grid: Option<GridSpec>,
    pub evolve_cfg: Option<EvolveConfig>,
    pub initial_data: Option<InitialData>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Ground-state certification tolerance.
    pub tol: f64,
    /// Shooting-parameter range scanned for a sign change.
    pub alpha_range: (f64, f64),
    pub cases: Vec<SweepCase>,
    pub verify: VerifySettings,
}

const KEYS: &[&str] = &[
    "mode",
    "N",
    "sigma",
    "b",
    "L",
    "M",
    "dt",
    "T",
    "record_every",
    "blowup_grad_factor",
    "blowup_dt_floor",
    "adapt",
    "boundary_tol",
    "alias_limit",
    "initial_data",
    "output_dir",
    "seed",
    "tol",
    "alpha_min",
    "alpha_max",
    "cases",
    "gn_trials",
    "lemma_pairs",
    "lemma_samples",
    "scalar_points",
];

/// Parses a configuration whose relative paths resolve against the
/// current directory; `mode` must be present.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, Path::new("."), None)
}

/// Parses a configuration with relative paths resolved against `base`.
/// A `mode` given here wins over a missing key but must agree with a
/// present one.
pub fn parse_config_in(text: &str, base: &Path, mode: Option<Mode>) -> Result<RunConfig> {
    let raw = tokenize(text)?;
    let kv = Values { raw: &raw };

    let mode = match (kv.get::<Mode>("mode")?, mode) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::validation("mode", format!("file says '{a}' but '{b}' was requested")));
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(CliError::validation("mode", "missing")),
    };

    let params = match (kv.get::<usize>("N")?, kv.get::<f64>("sigma")?, kv.get::<f64>("b")?) {
        (Some(n), Some(sigma), Some(b)) => Some(model_params(n, sigma, b)?),
        (None, None, None) if mode == Mode::Sweep => None,
        _ => {
            let missing = ["N", "sigma", "b"].into_iter().find(|k| !raw.contains_key(*k)).unwrap_or("N");
            return Err(CliError::validation(missing, "missing"));
        }
    };

    let grid = match (kv.get::<f64>("L")?, kv.get::<usize>("M")?) {
        (Some(l), Some(m)) => {
            let n = params.map(|p| p.n).ok_or_else(|| CliError::validation("N", "a grid needs a dimension"))?;
            Some(GridSpec::new(n, l, m).map_err(|e| CliError::validation("M", e.to_string()))?)
        }
        (None, None) => None,
        (Some(_), None) => return Err(CliError::validation("M", "missing (L is set)")),
        (None, Some(_)) => return Err(CliError::validation("L", "missing (M is set)")),
    };

    let evolve_cfg = match (kv.get::<f64>("dt")?, kv.get::<f64>("T")?) {
        (Some(dt), Some(t)) => Some(evolve_config(&kv, dt, t)?),
        (None, None) => None,
        (Some(_), None) => return Err(CliError::validation("T", "missing (dt is set)")),
        (None, Some(_)) => return Err(CliError::validation("dt", "missing (T is set)")),
    };

    let initial_data = match raw.get("initial_data") {
        Some(&(line, ref v)) => Some(initial_data(v, base).map_err(|e| match e {
            CliError::Parse { message, .. } => CliError::parse(line, message),
            other => other,
        })?),
        None => None,
    };

    let cases = match raw.get("cases") {
        Some(&(line, ref v)) => sweep_cases(v, line)?,
        None => Vec::new(),
    };

    let defaults = VerifySettings::default();
    let verify = VerifySettings {
        gn_trials: kv.get("gn_trials")?.unwrap_or(defaults.gn_trials),
        lemma_pairs: kv.get("lemma_pairs")?.unwrap_or(defaults.lemma_pairs),
        lemma_samples: kv.get("lemma_samples")?.unwrap_or(defaults.lemma_samples),
        scalar_points: kv.get("scalar_points")?.unwrap_or(defaults.scalar_points),
    };
    if verify.scalar_points < 2 {
        return Err(CliError::validation("scalar_points", "must be >= 2"));
    }

    let tol = kv.get::<f64>("tol")?.unwrap_or(1e-6);
    if !(tol > 0.0) {
        return Err(CliError::validation("tol", "must be > 0"));
    }

    let alpha_range = (
        kv.get::<f64>("alpha_min")?.unwrap_or(1e-2),
        kv.get::<f64>("alpha_max")?.unwrap_or(1e2),
    );
    if !(alpha_range.0 > 0.0) {
        return Err(CliError::validation("alpha_min", "must be > 0"));
    }
    if !(alpha_range.1 > alpha_range.0) || !alpha_range.1.is_finite() {
        return Err(CliError::validation("alpha_max", "must be finite and > alpha_min"));
    }

    let output_dir = match raw.get("output_dir") {
        Some((_, v)) => base.join(v),
        None => base.join("out"),
    };

    let cfg = RunConfig {
        mode,
        params,
        grid,
        evolve_cfg,
        initial_data,
        output_dir,
        seed: kv.get("seed")?.unwrap_or(0),
        tol,
        alpha_range,
        cases,
        verify,
    };
    require_for_mode(&cfg)?;
    Ok(cfg)
}

fn tokenize(text: &str) -> Result<HashMap<String, (usize, String)>> {
    let mut raw = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::parse(lineno, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(CliError::parse(lineno, format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(CliError::parse(lineno, format!("empty value for '{key}'")));
        }
        if let Some((first, _)) = raw.insert(key.to_string(), (lineno, value.to_string())) {
            return Err(CliError::parse(lineno, format!("'{key}' already set on line {first}")));
        }
    }
    Ok(raw)
}

struct Values<'a> {
    raw: &'a HashMap<String, (usize, String)>,
}

impl Values<'_> {
    fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: fmt::Display,
    {
        match self.raw.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<V>()
                .map(Some)
                .map_err(|e| CliError::parse(*line, format!("{key} = {v}: {e}"))),
        }
    }
}

fn model_params(n: usize, sigma: f64, b: f64) -> Result<ModelParams> {
    if n == 0 {
        return Err(CliError::validation("N", "must be >= 1"));
    }
    let cap = (n as f64).min(2.0);
    if !(b >= 0.0 && b < cap) {
        return Err(CliError::validation("b", format!("{b} violates 0 <= b < min(2, N) = {cap}")));
    }
    ModelParams::new(n, sigma, b).map_err(|e| CliError::validation("sigma", e.to_string()))
}

fn evolve_config(kv: &Values, dt: f64, t: f64) -> Result<EvolveConfig> {
    let mut cfg = EvolveConfig::new(dt, t);
    if let Some(v) = kv.get("record_every")? {
        cfg.record_every = v;
    }
    if let Some(v) = kv.get("blowup_grad_factor")? {
        cfg.blowup_grad_factor = v;
    }
    if let Some(v) = kv.get("blowup_dt_floor")? {
        cfg.blowup_dt_floor = v;
    }
    if let Some(v) = kv.get("adapt")? {
        cfg.adapt = v;
    }
    if let Some(v) = kv.get("boundary_tol")? {
        cfg.boundary_tol = v;
    }
    if let Some(v) = kv.get("alias_limit")? {
        cfg.alias_limit = v;
    }
    let checks: [(&str, bool, &str); 6] = [
        ("dt", dt > 0.0 && dt.is_finite(), "must be > 0"),
        ("T", t > 0.0 && t.is_finite(), "must be > 0"),
        ("record_every", cfg.record_every >= 1, "must be >= 1"),
        ("blowup_grad_factor", cfg.blowup_grad_factor > 1.0, "must be > 1"),
        ("blowup_dt_floor", cfg.blowup_dt_floor > 0.0, "must be > 0"),
        ("alias_limit", cfg.alias_limit > 0.0 && cfg.boundary_tol >= 0.0, "must be > 0"),
    ];
    if let Some((key, _, reason)) = checks.iter().find(|c| !c.1) {
        return Err(CliError::validation(*key, *reason));
    }
    Ok(cfg)
}

/// `name(arg, ...)` with numeric or path arguments.
fn call_syntax(text: &str) -> Option<(&str, Vec<&str>)> {
    let open = text.find('(')?;
    let inner = text[open + 1..].strip_suffix(')')?;
    let name = text[..open].trim();
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };
    Some((name, args))
}

fn initial_data(text: &str, base: &Path) -> Result<InitialData> {
    let bad = |m: String| CliError::parse(0, m);
    let (name, args) = call_syntax(text).ok_or_else(|| bad(format!("initial_data '{text}' is not of the form name(args)")))?;
    let nums = |want: usize| -> Result<Vec<f64>> {
        if args.len() != want {
            return Err(bad(format!("{name} takes {want} argument(s), got {}", args.len())));
        }
        args.iter()
            .map(|a| a.parse::<f64>().map_err(|e| bad(format!("{name}: '{a}': {e}"))))
            .collect()
    };
    let data = match name {
        "ground_state_scaled" => {
            let g = nums(1)?[0];
            if !(g > 0.0 && g.is_finite()) {
                return Err(CliError::validation("initial_data", format!("gamma = {g} must be > 0")));
            }
            InitialData::GroundStateScaled { gamma: g }
        }
        "gaussian" => {
            let v = nums(3)?;
            if !(v[0] != 0.0 && v[0].is_finite()) {
                return Err(CliError::validation("initial_data", "gaussian amplitude must be nonzero"));
            }
            if !(v[1] > 0.0 && v[1].is_finite()) {
                return Err(CliError::validation("initial_data", "gaussian width must be > 0"));
            }
            InitialData::Gaussian {
                amplitude: v[0],
                width: v[1],
                center: v[2],
            }
        }
        "file" => {
            if args.len() != 1 || args[0].is_empty() {
                return Err(bad("file takes one path".into()));
            }
            let path = base.join(args[0]);
            if !path.is_file() {
                return Err(CliError::validation("initial_data", format!("{} does not exist", path.display())));
            }
            InitialData::File { path }
        }
        other => return Err(bad(format!("unknown initial data '{other}'"))),
    };
    Ok(data)
}

/// `N, sigma, b, gamma; N, sigma, b, gamma; ...`
fn sweep_cases(text: &str, line: usize) -> Result<Vec<SweepCase>> {
    let mut cases = Vec::new();
    for entry in text.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let f: Vec<&str> = entry.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(CliError::parse(line, format!("sweep case '{entry}' needs N, sigma, b, gamma")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| CliError::parse(line, format!("'{s}': {e}")));
        let n = f[0]
            .parse::<usize>()
            .map_err(|e| CliError::parse(line, format!("'{}': {e}", f[0])))?;
        let case = SweepCase {
            n,
            sigma: num(f[1])?,
            b: num(f[2])?,
            gamma: num(f[3])?,
        };
        model_params(case.n, case.sigma, case.b).map_err(|e| match e {
            CliError::Validation { key, reason } => CliError::validation("cases", format!("{entry}: {key} {reason}")),
            other => other,
        })?;
        if !(case.gamma > 0.0) {
            return Err(CliError::validation("cases", format!("{entry}: gamma must be > 0")));
        }
        cases.push(case);
    }
    Ok(cases)
}

fn require_for_mode(cfg: &RunConfig) -> Result<()> {
    let need = |ok: bool, key: &str, why: &str| if ok { Ok(()) } else { Err(CliError::validation(key, why)) };
    match cfg.mode {
        Mode::Groundstate | Mode::Verify => Ok(()),
        Mode::Classify => {
            need(cfg.initial_data.is_some(), "initial_data", "classify needs initial data")?;
            if let Some(InitialData::Gaussian { .. }) = cfg.initial_data {
                need(cfg.grid.is_some(), "L", "gaussian data needs a grid (L, M)")?;
            }
            Ok(())
        }
        Mode::Evolve => {
            need(cfg.initial_data.is_some(), "initial_data", "evolve needs initial data")?;
            need(cfg.grid.is_some(), "L", "evolve needs a grid (L, M)")?;
            need(cfg.evolve_cfg.is_some(), "dt", "evolve needs dt and T")
        }
        Mode::Sweep => need(!cfg.cases.is_empty(), "cases", "sweep needs at least one case"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_classify_config() {
        let cfg = parse_config("mode = classify\nN = 2\nsigma = 1.0\nb = 0.5\nL = 8\nM = 64\ninitial_data = gaussian(2, 1, 0)\n").unwrap();
        assert_eq!(cfg.mode, Mode::Classify);
        let p = cfg.params.unwrap();
        assert_eq!((p.n, p.sigma, p.b), (2, 1.0, 0.5));
        assert_eq!(cfg.grid.unwrap().points, 64);
    }

    #[test]
    fn b_outside_range_is_a_validation_error() {
        let err = parse_config("mode = groundstate\nN = 3\nsigma = 1\nb = 2.5\n").unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "b"), "{err}");
    }

    #[test]
    fn misspelled_key_is_a_parse_error() {
        let err = parse_config("mode = groundstate\nsigmma = 1.0\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn comments_blank_lines_and_duplicates() {
        let text = "# header\n\nmode = verify # trailing\nN = 1\nsigma = 3\nb = 0.5\nseed = 7\n";
        assert_eq!(parse_config(text).unwrap().seed, 7);
        let err = parse_config("mode = verify\nN = 1\nN = 2\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }));
    }

    #[test]
    fn initial_data_forms() {
        let base = "mode = classify\nN = 1\nsigma = 3\nb = 0.5\n";
        let g = parse_config(&format!("{base}initial_data = ground_state_scaled(0.9)\n")).unwrap();
        assert_eq!(g.initial_data, Some(InitialData::GroundStateScaled { gamma: 0.9 }));
        let bad = parse_config(&format!("{base}initial_data = ground_state_scaled(0)\n")).unwrap_err();
        assert!(matches!(bad, CliError::Validation { .. }));
        let zero = parse_config(&format!("{base}L = 8\nM = 64\ninitial_data = gaussian(0, 1, 0)\n")).unwrap_err();
        assert!(matches!(zero, CliError::Validation { .. }));
        let missing = parse_config(&format!("{base}initial_data = file(/no/such/profile.csv)\n")).unwrap_err();
        assert!(matches!(missing, CliError::Validation { .. }));
        let syntax = parse_config(&format!("{base}initial_data = gaussian(1, 2\n")).unwrap_err();
        assert!(matches!(syntax, CliError::Parse { line: 5, .. }), "{syntax}");
    }

    #[test]
    fn mode_requirements() {
        let err = parse_config("mode = evolve\nN = 1\nsigma = 3\nb = 0.5\ninitial_data = ground_state_scaled(0.5)\n").unwrap_err();
        assert!(matches!(err, CliError::Validation { .. }));
        let err = parse_config("mode = sweep\n").unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "cases"));
        let cfg = parse_config("mode = sweep\ncases = 1, 3, 0.5, 0.9; 2, 1, 0.5, 1.1\n").unwrap();
        assert_eq!(cfg.cases.len(), 2);
        assert_eq!(cfg.cases[1], SweepCase { n: 2, sigma: 1.0, b: 0.5, gamma: 1.1 });
    }

    #[test]
    fn evolve_settings_are_checked() {
        let base = "mode = evolve\nN = 1\nsigma = 3\nb = 0.5\nL = 16\nM = 256\ninitial_data = ground_state_scaled(0.5)\n";
        let cfg = parse_config(&format!("{base}dt = 1e-3\nT = 0.1\nadapt = true\nrecord_every = 5\n")).unwrap();
        let e = cfg.evolve_cfg.unwrap();
        assert!(e.adapt && e.record_every == 5 && e.blowup_grad_factor == 1e3);
        let err = parse_config(&format!("{base}dt = 1e-3\nT = 0.1\nblowup_grad_factor = 1\n")).unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "blowup_grad_factor"));
        let err = parse_config(&format!("{base}dt = -1\nT = 0.1\n")).unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "dt"));
    }

    #[test]
    fn requested_mode_must_agree() {
        let err = parse_config_in("mode = verify\nN = 1\nsigma = 3\nb = 0.5\n", Path::new("."), Some(Mode::Groundstate)).unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "mode"));
        let cfg = parse_config_in("N = 1\nsigma = 3\nb = 0.5\n", Path::new("."), Some(Mode::Groundstate)).unwrap();
        assert_eq!(cfg.mode, Mode::Groundstate);
    }
}
