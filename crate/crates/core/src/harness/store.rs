//! Run-record persistence and the per-seed experiment driver.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::{HarnessError, RunRecord};

/// Serializes and writes atomically: a temporary file in the target
/// directory, then a rename. Interrupted writes leave no partial record.
pub fn write_json_atomic<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let stem = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
    let tmp = dir.join(format!(".{stem}.tmp-{}", std::process::id()));
    let bytes = serde_json::to_vec_pretty(value)?;
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_record(path: &Path, record: &RunRecord) -> Result<(), HarnessError> {
    write_json_atomic(path, record)
}

pub(crate) fn write_grid_report_path(
    path: &Path,
    report: &super::grid::GridReport,
) -> Result<(), HarnessError> {
    write_json_atomic(path, report)
}

pub fn read_record(path: &Path) -> Result<RunRecord, HarnessError> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// All record files (`*.json`) in a directory, sorted by file name.
pub fn read_records(dir: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_record(p)).collect()
}

pub fn record_path(config: &ExperimentConfig, seed: u64) -> PathBuf {
    config.output.join(format!("{}-seed{:04}.json", config.name, seed))
}

/// Runs the job once per seed and persists each record atomically.
/// Existing records are loaded instead of recomputed unless `force` is
/// set, so a completed experiment re-runs as a no-op.
pub fn run_experiment(config: &ExperimentConfig, force: bool) -> Result<Vec<RunRecord>, HarnessError> {
    config.validate()?;
    fs::create_dir_all(&config.output)?;
    let mut records = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let path = record_path(config, seed);
        let record = if !force && path.exists() {
            let existing = read_record(&path)?;
            if existing.seed != seed {
                return Err(HarnessError::InvalidConfig(format!(
                    "{} holds seed {}, expected {}",
                    path.display(),
                    existing.seed,
                    seed
                )));
            }
            existing
        } else {
            let record = config.job.run(seed)?;
            write_record(&path, &record)?;
            record
        };
        records.push(record);
    }
    Ok(records)
}
