use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Solved,
    Timeout,
    BpFailure,
    Contradiction,
}

/// One named observation point along a run (schedule step, epoch, γ step…).
pub type TracePoint = BTreeMap<String, f64>;

/// Outcome of a single solver run; everything needed to re-verify it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    /// Snapshot of all solver parameters, as a JSON object.
    pub params: serde_json::Value,
    pub seed: u64,
    pub status: RunStatus,
    /// Total work performed, in the algorithm's natural unit
    /// (move attempts for SA, epochs for SGD, message sweeps for BP).
    pub iterations: u64,
    /// SHA-256 over the ±1 solution entries; present iff status is Solved.
    pub solution_hash: Option<String>,
    pub trace: Vec<TracePoint>,
}

impl RunRecord {
    pub fn is_solved(&self) -> bool {
        self.status == RunStatus::Solved
    }
}

/// Canonical hash of a ±1 assignment (one byte per entry: 'P' or 'M').
pub fn solution_hash(signs: &[i8]) -> String {
    let bytes: Vec<u8> = signs
        .iter()
        .map(|&s| if s > 0 { b'P' } else { b'M' })
        .collect();
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}
