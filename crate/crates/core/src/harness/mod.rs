//! Experiment configuration, run records, persistence, fits, and data
//! emission.

pub mod config;
pub mod emit;
pub mod fit;
pub mod grid;
mod record;
pub mod store;

#[cfg(test)]
mod tests;

use thiserror::Error;

pub use config::{instance_seed, ExperimentConfig, Job, ModelSpec};
pub use emit::emit_curves;
pub use fit::{
    fit_power_law, fit_scaling, fit_stretched, scaling_points, spearman, FitModel, FitReport,
    PowerLawFit, ScalePoint, StretchedFit,
};
pub use grid::{grid_search, GridEntry, GridPoint, GridReport};
pub use record::{solution_hash, RunRecord, RunStatus, TracePoint};
pub use store::{read_record, read_records, record_path, run_experiment, write_json_atomic, write_record};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("config parse error: {0}")]
    ParseConfig(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("mixed record kinds: {0}")]
    MixedKinds(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Rsa(#[from] crate::rsa::RsaError),
    #[error(transparent)]
    Rsgd(#[from] crate::rsgd::RsgdError),
    #[error(transparent)]
    Fbp(#[from] crate::fbp::FbpError),
    #[error(transparent)]
    Ksat(#[from] crate::ksat::KSatError),
}
