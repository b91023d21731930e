//! Locale-independent CSV and JSON emission.
//!
//! Numbers are written in their shortest round-trip form, so a value read
//! back parses to the identical `f64`. Plain decimal notation is used
//! where it is short and scientific notation elsewhere.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use inlslab::{InvariantRecord, ModelParams, RadialProfile};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const PROFILE_HEADER: &str = "r,Q";
pub const TRAJECTORY_HEADER: &str = "t,mass,energy,grad_sq,variance,variance_rate,virial_rhs";

pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn profile_csv(profile: &RadialProfile) -> String {
    let mut out = String::with_capacity(40 * profile.r.len());
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for (r, q) in profile.r.iter().zip(&profile.q) {
        let _ = writeln!(out, "{},{}", fmt_num(*r), fmt_num(*q));
    }
    out
}

pub fn trajectory_csv(records: &[InvariantRecord]) -> String {
    let mut out = String::with_capacity(128 * records.len());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        let row = [r.t, r.mass, r.energy, r.grad_sq, r.variance, r.variance_rate, r.virial_rhs];
        let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Reads an `r,Q` table back into a profile for the given model.
pub fn parse_profile_csv(text: &str, params: ModelParams) -> Result<RadialProfile> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == PROFILE_HEADER => {}
        _ => return Err(CliError::parse(1, format!("expected header '{PROFILE_HEADER}'"))),
    }
    let (mut r, mut q) = (Vec::new(), Vec::new());
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| CliError::parse(i + 1, m);
        let (a, b) = line.split_once(',').ok_or_else(|| bad(format!("expected 'r,Q', got '{line}'")))?;
        r.push(a.trim().parse::<f64>().map_err(|e| bad(format!("r: {e}")))?);
        q.push(b.trim().parse::<f64>().map_err(|e| bad(format!("Q: {e}")))?);
    }
    RadialProfile::from_samples(params, r, q).map_err(|e| CliError::validation("initial_data", e.to_string()))
}

pub fn read_profile(path: &Path, params: ModelParams) -> Result<RadialProfile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_profile_csv(&text, params).map_err(|e| match e {
        CliError::Parse { line, message } => CliError::parse(line, format!("{}: {message}", path.display())),
        other => other,
    })
}

pub fn to_json<V: Serialize>(value: &V) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 1e-300, 3.0e-5, 0.1 + 0.2, 123456.789, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1e-12), "1e-12");
    }

    #[test]
    fn trajectory_header_and_rows() {
        let rec = InvariantRecord {
            t: 0.0,
            mass: 1.0,
            energy: -0.5,
            grad_sq: 2.0,
            variance: 3.0,
            variance_rate: 0.0,
            virial_rhs: -4.0,
        };
        let csv = trajectory_csv(&[rec]);
        assert_eq!(csv, format!("{TRAJECTORY_HEADER}\n0,1,-0.5,2,3,0,-4\n"));
    }

    #[test]
    fn profile_table_rejects_garbage() {
        let p = ModelParams::new(1, 1.0, 0.0).unwrap();
        assert!(matches!(parse_profile_csv("x,y\n", p), Err(CliError::Parse { line: 1, .. })));
        assert!(matches!(parse_profile_csv("r,Q\n1,2\nabc\n", p), Err(CliError::Parse { line: 3, .. })));
    }
}
