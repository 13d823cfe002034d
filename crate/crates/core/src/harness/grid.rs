//! Parameter grid search over experiment configurations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::store::{run_experiment, write_grid_report_path};
use super::{HarnessError, RunRecord, RunStatus};

/// One grid point: dotted-path overrides applied to the base config
/// (values in TOML literal syntax, e.g. `"0.1"` or `"\"committee\""`).
pub type GridPoint = BTreeMap<String, String>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridEntry {
    pub index: usize,
    pub overrides: GridPoint,
    pub runs: usize,
    pub success_rate: f64,
    /// Geometric mean of solved iteration counts; absent when nothing solved.
    pub mean_iterations: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridReport {
    /// Ranked best-first: success rate descending, then mean iterations
    /// ascending, then grid index.
    pub ranking: Vec<GridEntry>,
}

/// Order-independent aggregate of one grid point's records.
pub fn summarize(index: usize, overrides: &GridPoint, records: &[RunRecord]) -> GridEntry {
    let solved: Vec<f64> = records
        .iter()
        .filter(|r| r.status == RunStatus::Solved)
        .map(|r| (r.iterations.max(1) as f64).ln())
        .collect();
    GridEntry {
        index,
        overrides: overrides.clone(),
        runs: records.len(),
        success_rate: solved.len() as f64 / records.len().max(1) as f64,
        mean_iterations: if solved.is_empty() {
            None
        } else {
            Some((solved.iter().sum::<f64>() / solved.len() as f64).exp())
        },
    }
}

pub fn rank_entries(mut entries: Vec<GridEntry>) -> Vec<GridEntry> {
    entries.sort_by(|a, b| {
        b.success_rate
            .total_cmp(&a.success_rate)
            .then(
                a.mean_iterations
                    .unwrap_or(f64::INFINITY)
                    .total_cmp(&b.mean_iterations.unwrap_or(f64::INFINITY)),
            )
            .then(a.index.cmp(&b.index))
    });
    entries
}

/// Runs each grid point (records land in a per-point subdirectory of the
/// base output), aggregates, ranks, and persists the report next to them.
pub fn grid_search(
    base: &ExperimentConfig,
    grid: &[GridPoint],
    force: bool,
) -> Result<GridReport, HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::InvalidConfig("empty parameter grid".into()));
    }
    let mut entries = Vec::with_capacity(grid.len());
    for (index, overrides) in grid.iter().enumerate() {
        let mut config = base.clone();
        for (path, value) in overrides {
            config = config.with_override(path, value)?;
        }
        config.output = base.output.join(format!("grid-{index:03}"));
        let records = run_experiment(&config, force)?;
        entries.push(summarize(index, overrides, &records));
    }
    let report = GridReport { ranking: rank_entries(entries) };
    write_grid_report_path(&base.output.join("grid-report.json"), &report)?;
    Ok(report)
}
