//! Experiment configuration: one TOML file per experiment describing the
//! job (algorithm + model + solver parameters), the seed list, and the
//! output directory. CLI flags override file values via dotted paths.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::fbp::{solve_fbp, FbpProtocol};
use crate::harness::RunRecord;
use crate::ksat::{generate_ksat, parse_cnf, solve_ksat, KSatProtocol};
use crate::model::{generate_patterns, NetworkKind, Topology};
use crate::rsa::{run_sa, ProposalMode, SaSchedule};
use crate::rsgd::{run_rsgd, SgdConfig};

/// Network and pattern-set description shared by the three network solvers.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelSpec {
    pub n: usize,
    pub k: usize,
    pub kind: String,
    pub alpha: f64,
    /// Fixed pattern seed: the same instance for every run seed. When
    /// absent each run draws its own instance from a stream split off the
    /// run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern_seed: Option<u64>,
}

impl ModelSpec {
    pub fn topology(&self) -> Result<Topology, HarnessError> {
        let kind = NetworkKind::parse(&self.kind)
            .ok_or_else(|| HarnessError::InvalidConfig(format!("unknown network kind {:?}", self.kind)))?;
        Ok(Topology::new(self.n, self.k, kind)?)
    }
}

/// Instance seed for a run: the configured pattern seed if fixed,
/// otherwise a fixed bijective split of the run seed so that instance
/// randomness and solver randomness never share a generator stream.
pub fn instance_seed(pattern_seed: Option<u64>, run_seed: u64) -> u64 {
    pattern_seed.unwrap_or(run_seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(0x1CE))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "algorithm")]
pub enum Job {
    Rsa {
        model: ModelSpec,
        y: usize,
        schedule: SaSchedule,
        mode: ProposalMode,
        max_iters: u64,
    },
    Rsgd {
        model: ModelSpec,
        config: SgdConfig,
    },
    Fbp {
        model: ModelSpec,
        protocol: FbpProtocol,
    },
    Ksat {
        n: usize,
        alpha: f64,
        k: usize,
        /// DIMACS file instead of random generation.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cnf: Option<PathBuf>,
        protocol: KSatProtocol,
    },
}

impl Job {
    pub fn algorithm(&self) -> &'static str {
        match self {
            Job::Rsa { .. } => "rsa",
            Job::Rsgd { .. } => "rsgd",
            Job::Fbp { .. } => "fbp",
            Job::Ksat { .. } => "ksat",
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match self {
            Job::Rsa { model, y, schedule, max_iters, .. } => {
                model.topology()?;
                schedule.validate()?;
                if *y == 0 || *max_iters == 0 {
                    return Err(HarnessError::InvalidConfig("need y ≥ 1 and max_iters ≥ 1".into()));
                }
            }
            Job::Rsgd { model, config } => {
                model.topology()?;
                config.validate()?;
            }
            Job::Fbp { model, protocol } => {
                model.topology()?;
                protocol.validate()?;
            }
            Job::Ksat { protocol, .. } => {
                protocol.validate()?;
            }
        }
        Ok(())
    }

    pub fn run(&self, seed: u64) -> Result<RunRecord, HarnessError> {
        match self {
            Job::Rsa { model, y, schedule, mode, max_iters } => {
                let patterns = generate_patterns(
                    model.topology()?,
                    model.alpha,
                    instance_seed(model.pattern_seed, seed),
                )?;
                Ok(run_sa(&patterns, *y, schedule, *mode, seed, *max_iters)?)
            }
            Job::Rsgd { model, config } => {
                let patterns = generate_patterns(
                    model.topology()?,
                    model.alpha,
                    instance_seed(model.pattern_seed, seed),
                )?;
                Ok(run_rsgd(&patterns, config, seed)?)
            }
            Job::Fbp { model, protocol } => {
                let patterns = generate_patterns(
                    model.topology()?,
                    model.alpha,
                    instance_seed(model.pattern_seed, seed),
                )?;
                Ok(solve_fbp(&patterns, protocol, seed)?)
            }
            Job::Ksat { n, alpha, k, cnf, protocol } => {
                let instance = match cnf {
                    Some(path) => parse_cnf(&std::fs::read_to_string(path)?)?,
                    None => generate_ksat(*n, *alpha, *k, instance_seed(None, seed))?,
                };
                Ok(solve_ksat(&instance, protocol, seed)?.record)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Used as the record file-name stem.
    pub name: String,
    pub seeds: Vec<u64>,
    /// Record directory; relative paths are resolved by the caller
    /// (the CLI prefixes the output-root environment variable).
    pub output: PathBuf,
    pub job: Job,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::ParseConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string_pretty(self).map_err(|e| HarnessError::ParseConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        {
            return Err(HarnessError::InvalidConfig(format!(
                "name {:?} is not a safe file stem",
                self.name
            )));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::InvalidConfig("need at least one seed".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(HarnessError::InvalidConfig("duplicate seeds".into()));
        }
        self.job.validate()
    }

    /// Dotted-path override on the TOML representation, e.g.
    /// `job.config.eta_prime = 0.1` or `seeds = [1, 2]`.
    pub fn with_override(&self, path: &str, value: &str) -> Result<ExperimentConfig, HarnessError> {
        let mut root = toml::Value::try_from(self).map_err(|e| HarnessError::ParseConfig(e.to_string()))?;
        let parsed: toml::Value = toml::from_str(&format!("v = {value}"))
            .map(|t: toml::Table| t["v"].clone())
            .or_else(|_| toml::from_str(&format!("v = {value:?}")).map(|t: toml::Table| t["v"].clone()))
            .map_err(|e| HarnessError::ParseConfig(format!("bad override value {value:?}: {e}")))?;
        let parts: Vec<&str> = path.split('.').collect();
        let mut cursor = &mut root;
        for part in &parts[..parts.len() - 1] {
            cursor = cursor
                .as_table_mut()
                .ok_or_else(|| HarnessError::InvalidConfig(format!("{path}: not a table at {part}")))?
                .get_mut(*part)
                .ok_or_else(|| HarnessError::InvalidConfig(format!("{path}: no field {part}")))?;
        }
        cursor
            .as_table_mut()
            .ok_or_else(|| HarnessError::InvalidConfig(format!("{path}: not a table")))?
            .insert(parts[parts.len() - 1].to_string(), parsed);
        let config: ExperimentConfig =
            root.try_into().map_err(|e| HarnessError::ParseConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}
