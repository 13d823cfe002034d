//! Flattens run records into plottable CSV tables.

use std::collections::BTreeMap;
use std::io::Write;

use super::{HarnessError, RunRecord, RunStatus};

fn status_str(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Solved => "solved",
        RunStatus::Timeout => "timeout",
        RunStatus::BpFailure => "bp-failure",
        RunStatus::Contradiction => "contradiction",
    }
}

fn check_kind(records: &[RunRecord], kind: &str) -> Result<(), HarnessError> {
    if let Some(r) = records.iter().find(|r| r.algorithm != kind) {
        return Err(HarnessError::MixedKinds(format!(
            "expected {kind} records, found {}",
            r.algorithm
        )));
    }
    Ok(())
}

fn param_f64(r: &RunRecord, key: &str) -> f64 {
    r.params[key].as_f64().unwrap_or(f64::NAN)
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Per-record, per-trace-point curves for the selected algorithm:
/// - `rsa`: n, alpha, seed, status, iterations
/// - `rsgd`: n, alpha, seed, status, epochs, min_error, error_rate
/// - `fbp`: n, alpha, seed, gamma, q, error_rate, overlap_s, distance,
///   local_entropy (one row per ramp step; optional columns left empty)
/// - `ksat`: alpha, runs, solved, success_probability (grouped by alpha)
pub fn emit_curves<W: Write>(records: &[RunRecord], kind: &str, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    check_kind(records, kind)?;
    match kind {
        "rsa" => {
            w.write_record(["n", "alpha", "seed", "status", "iterations"])?;
            for r in records {
                w.write_record([
                    fmt(param_f64(r, "n")),
                    fmt(param_f64(r, "alpha")),
                    r.seed.to_string(),
                    status_str(r.status).into(),
                    r.iterations.to_string(),
                ])?;
            }
        }
        "rsgd" => {
            w.write_record(["n", "alpha", "seed", "status", "epochs", "min_error", "error_rate"])?;
            for r in records {
                let min_error = r
                    .trace
                    .iter()
                    .filter_map(|tp| tp.get("min_error").copied())
                    .fold(f64::NAN, f64::min);
                let p = (param_f64(r, "alpha") * param_f64(r, "n")).round();
                w.write_record([
                    fmt(param_f64(r, "n")),
                    fmt(param_f64(r, "alpha")),
                    r.seed.to_string(),
                    status_str(r.status).into(),
                    r.iterations.to_string(),
                    fmt(min_error),
                    fmt(min_error / p),
                ])?;
            }
        }
        "fbp" => {
            w.write_record([
                "n",
                "alpha",
                "seed",
                "gamma",
                "q",
                "error_rate",
                "overlap_s",
                "distance",
                "local_entropy",
            ])?;
            for r in records {
                let p = (param_f64(r, "alpha") * param_f64(r, "n")).round();
                for tp in &r.trace {
                    let get = |k: &str| tp.get(k).copied().unwrap_or(f64::NAN);
                    w.write_record([
                        fmt(param_f64(r, "n")),
                        fmt(param_f64(r, "alpha")),
                        r.seed.to_string(),
                        fmt(get("gamma")),
                        fmt(get("q")),
                        fmt(get("error_count") / p),
                        fmt(get("overlap_s")),
                        fmt(get("distance")),
                        fmt(get("local_entropy")),
                    ])?;
                }
            }
        }
        "ksat" => {
            w.write_record(["alpha", "runs", "solved", "success_probability"])?;
            let mut groups: BTreeMap<String, (usize, usize)> = BTreeMap::new();
            for r in records {
                let alpha = param_f64(r, "alpha");
                let entry = groups.entry(format!("{alpha:.6}")).or_default();
                entry.0 += 1;
                entry.1 += usize::from(r.status == RunStatus::Solved);
            }
            for (alpha, (runs, solved)) in groups {
                w.write_record([
                    alpha.trim_end_matches('0').trim_end_matches('.').to_string(),
                    runs.to_string(),
                    solved.to_string(),
                    fmt(solved as f64 / runs as f64),
                ])?;
            }
        }
        other => {
            return Err(HarnessError::MixedKinds(format!("unknown curve kind {other:?}")));
        }
    }
    w.flush()?;
    Ok(())
}
