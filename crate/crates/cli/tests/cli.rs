use std::fs;
use std::path::Path;
use std::process::Command;

use inlslab::ModelParams;
use inlslab_cli::output::{parse_profile_csv, read_profile, TRAJECTORY_HEADER};
use inlslab_cli::{parse_config, parse_config_in, run, CliError, Mode};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_inlslab"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn spec_style_examples_parse() {
    let cfg = parse_config("sigma = 1.0\nb = 0.5\nN = 2\nmode = classify\nL = 10\nM = 128\ninitial_data = gaussian(1, 1, 0)\n").unwrap();
    assert_eq!(cfg.mode, Mode::Classify);
    assert!(matches!(
        parse_config("mode = groundstate\nN = 3\nsigma = 1\nb = 2.5\n"),
        Err(CliError::Validation { .. })
    ));
    assert!(matches!(parse_config("mode = groundstate\nsigmma = 1.0\n"), Err(CliError::Parse { .. })));
}

#[test]
fn soliton_profile_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_in("mode = groundstate\nN = 1\nsigma = 1\nb = 0\noutput_dir = gs\n", dir.path(), None).unwrap();
    run(&cfg).unwrap();
    let p = ModelParams::new(1, 1.0, 0.0).unwrap();
    let profile = read_profile(&dir.path().join("gs/profile.csv"), p).unwrap();
    let err = profile
        .r
        .iter()
        .zip(&profile.q)
        .filter(|(&r, _)| r <= 20.0)
        .map(|(&r, &q)| (q - 2f64.sqrt() / r.cosh()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn profile_round_trips_through_file_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let gs_cfg = parse_config_in("mode = groundstate\nN = 1\nsigma = 3\nb = 0.5\noutput_dir = gs\n", dir.path(), None).unwrap();
    run(&gs_cfg).unwrap();
    let csv = fs::read_to_string(dir.path().join("gs/profile.csv")).unwrap();
    let p = ModelParams::new(1, 3.0, 0.5).unwrap();
    let back = parse_profile_csv(&csv, p).unwrap();
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gs/report.json")).unwrap()).unwrap();
    assert_eq!(back.r.len() as u64, report["samples"].as_u64().unwrap());
    // the emitted values reload bit for bit, well beyond 15 significant digits
    let again = inlslab_cli::output::profile_csv(&back);
    assert_eq!(again, csv);

    let from_file = "mode = classify\nN = 1\nsigma = 3\nb = 0.5\ninitial_data = file(gs/profile.csv)\noutput_dir = a\n";
    let scaled = "mode = classify\nN = 1\nsigma = 3\nb = 0.5\ninitial_data = ground_state_scaled(1)\noutput_dir = b\n";
    for text in [from_file, scaled] {
        run(&parse_config_in(text, dir.path(), None).unwrap()).unwrap();
    }
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a/report.json")).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b/report.json")).unwrap()).unwrap();
    let rel = |k: &str| (a[k].as_f64().unwrap() / b[k].as_f64().unwrap() - 1.0).abs();
    assert!(rel("mass") < 1e-10 && rel("grad_sq") < 1e-6, "{} {}", rel("mass"), rel("grad_sq"));
    assert_eq!(b["verdict"], "Threshold");
}

#[test]
fn classify_preset_is_global() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "N = 1\nsigma = 3\nb = 0.5\ninitial_data = ground_state_scaled(0.9)\noutput_dir = out\n",
    );
    let st = bin().args(["classify", "--config"]).arg(&cfg).status().unwrap();
    assert!(st.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"], "Global");
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut documented = [
        "mode", "params", "initial_data", "mass", "energy", "grad_sq", "me_u", "me_q", "g_u", "g_q", "finite_variance", "verdict",
    ];
    keys.sort_unstable();
    documented.sort_unstable();
    assert_eq!(keys, documented);
}

#[test]
fn evolve_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.cfg",
        "N = 1\nsigma = 1\nb = 0\nL = 32\nM = 512\ndt = 1e-3\nT = 0.1\nrecord_every = 10\nboundary_tol = 1e-8\ninitial_data = ground_state_scaled(1)\noutput_dir = out\n",
    );
    let st = bin().args(["evolve", "--config"]).arg(&cfg).status().unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
    assert_eq!(lines.count(), 11);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(v["outcome"]["outcome"], "CompletedT");
    assert!(v["mass_drift"].as_f64().unwrap() < 1e-12);
}

#[test]
fn verify_is_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.cfg",
        "N = 2\nsigma = 1.5\nb = 0.5\ngn_trials = 200\nlemma_pairs = 20\nlemma_samples = 100\nscalar_points = 1000\noutput_dir = out\n",
    );
    let mut reports = Vec::new();
    for threads in ["1", "4", "4"] {
        let out = bin()
            .env("INLSLAB_THREADS", threads)
            .args(["verify", "--seed", "42", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
        reports.push(fs::read(dir.path().join("out/verify.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[1], reports[2]);
    let v: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["passed"], true);

    let other = bin().args(["verify", "--seed", "7", "--config"]).arg(&cfg).output().unwrap();
    assert!(other.status.success());
    assert_ne!(fs::read(dir.path().join("out/verify.json")).unwrap(), reports[0]);
}

#[test]
fn sweep_aggregates_cases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.cfg",
        "cases = 1, 3, 0.5, 0.9; 1, 3, 0.5, 1.2; 2, 1, 0.5, 0.5\noutput_dir = out\n",
    );
    let st = bin().args(["sweep", "--config"]).arg(&cfg).status().unwrap();
    assert!(st.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 3);
    assert_eq!(arr[0]["verdict"], "Global");
    assert_eq!(arr[2]["case"]["N"], 2);
    for k in 0..3 {
        assert!(dir.path().join(format!("out/case_{k:03}/profile.csv")).is_file());
    }
}

#[test]
fn errors_are_reported_as_json_with_nonzero_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "N = 1\nsigmma = 3\n");
    let out = bin().args(["groundstate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "ParseError");
    assert_eq!(v["line"], 2);

    let cfg = write(
        dir.path(),
        "small.cfg",
        "N = 1\nsigma = 3\nb = 0.5\nL = 4\nM = 64\ndt = 1e-3\nT = 0.1\ninitial_data = ground_state_scaled(0.9)\n",
    );
    let out = bin().args(["evolve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "DomainTooSmall");

    let out = bin().args(["verify", "--config"]).arg(dir.path().join("missing.cfg")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "IoError");
}

#[test]
fn alpha_range_reaches_small_shooting_values() {
    let dir = tempfile::tempdir().unwrap();
    let base = "N = 2\nsigma = 0.15\nb = 1.8\n";
    let narrow = write(dir.path(), "n.cfg", base);
    let out = bin().args(["groundstate", "--config"]).arg(&narrow).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "BracketFailure");

    let wide = write(dir.path(), "w.cfg", &format!("{base}alpha_min = 1e-8\n"));
    let out = bin().args(["groundstate", "--config"]).arg(&wide).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let alpha = v["alpha"].as_f64().unwrap();
    assert!(alpha > 1e-5 && alpha < 1e-3, "{alpha}");

    let bad = write(dir.path(), "b.cfg", &format!("{base}alpha_min = 1\nalpha_max = 0.5\n"));
    let out = bin().args(["groundstate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
