//! Two-level stochastic gradient descent: continuous shadow weights per
//! replica, binarized views driving the energy, elastic coupling through the
//! per-site replica sum, minibatches, and γ scoping.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{solution_hash, RunRecord, RunStatus, TracePoint};
use crate::model::{sign, PatternSet, Topology, WeightConfig};

#[derive(Debug, Error)]
pub enum RsgdError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionVariant {
    /// tanh(γT) − W (the form used for all headline results).
    Standard,
    /// tanh(γT) − tanh(γy)·W; vanishes on fully aligned ±1 configurations.
    HypercubeCorrected,
    /// T/y − W, from tracing the reference over the continuum.
    ContinuousTrace,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SgdConfig {
    pub y: usize,
    pub minibatch: usize,
    /// Gradient step. The binarization is scale-invariant, so this is a
    /// gauge choice; 1.0 unless exercising the integer-shadow regime.
    pub eta: f64,
    pub eta_prime: f64,
    /// May be infinite (tanh replaced by sign from the start).
    pub gamma0: f64,
    pub dgamma: f64,
    pub max_epochs: usize,
    pub variant: InteractionVariant,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<(), RsgdError> {
        if self.y == 0 {
            return Err(RsgdError::InvalidConfig("y must be at least 1".into()));
        }
        if self.minibatch == 0 {
            return Err(RsgdError::InvalidConfig("minibatch size must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(RsgdError::InvalidConfig("max epochs must be at least 1".into()));
        }
        if !(self.eta > 0.0) {
            return Err(RsgdError::InvalidConfig("eta must be positive".into()));
        }
        if !(self.eta_prime >= 0.0) {
            return Err(RsgdError::InvalidConfig("eta_prime must be non-negative".into()));
        }
        Ok(())
    }
}

/// Units of `w` whose entries receive a −½ξ gradient for this pattern:
/// the c^μ cheapest violated units, ties broken by lowest unit index.
pub fn pattern_gradient_units(
    w: &WeightConfig,
    pattern: &crate::model::Pattern,
    topology: &Topology,
) -> Vec<usize> {
    let units = topology.units();
    if units == 1 {
        let delta = w.unit_dot(pattern, 0);
        return if delta < 0 { vec![0] } else { vec![] };
    }
    let mut delta_out = 0i64;
    let mut violated: Vec<(i64, usize)> = Vec::new();
    for k in 0..units {
        let d = w.unit_dot(pattern, k);
        delta_out += sign(d);
        if d < 0 {
            violated.push(((1 - d) / 2, k));
        }
    }
    if delta_out >= 0 {
        return vec![];
    }
    violated.sort_unstable();
    let c = ((1 - delta_out) / 2) as usize;
    violated[..c].iter().map(|&(_, k)| k).collect()
}

/// Dense ∂E^μ/∂W view (entries in {−½, 0, +½}).
pub fn pattern_gradient(
    w: &WeightConfig,
    pattern: &crate::model::Pattern,
    topology: &Topology,
) -> Vec<f64> {
    let mut g = vec![0.0; topology.n()];
    let fan_in = topology.fan_in();
    for k in pattern_gradient_units(w, pattern, topology) {
        for i in 0..fan_in {
            g[k * fan_in + i] = -0.5 * pattern.get_ki(k, i) as f64;
        }
    }
    g
}

/// Elastic coupling term added (times η′) to the shadow weight of a site.
pub fn interaction_term(
    t: i64,
    w: i64,
    gamma: f64,
    y: usize,
    variant: InteractionVariant,
) -> f64 {
    match variant {
        InteractionVariant::Standard => tanh_or_sign(gamma, t) - w as f64,
        InteractionVariant::HypercubeCorrected => {
            tanh_or_sign(gamma, t) - tanh_or_sign(gamma, y as i64) * w as f64
        }
        InteractionVariant::ContinuousTrace => t as f64 / y as f64 - w as f64,
    }
}

/// tanh(γt), with the γ=∞ limit sign(t) (and 0 at t=0).
#[inline]
fn tanh_or_sign(gamma: f64, t: i64) -> f64 {
    if gamma.is_infinite() {
        match t.cmp(&0) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => -1.0,
        }
    } else {
        (gamma * t as f64).tanh()
    }
}

/// Shadow weights, binarized views and the per-site replica sum.
pub struct RsgdState {
    pub topology: Topology,
    pub y: usize,
    pub shadow: Vec<Vec<f64>>,
    pub replicas: Vec<WeightConfig>,
    pub t: Vec<i64>,
    /// Zero shadows are nudged to +ε; scales with η so that the binary
    /// trajectory is invariant under a common rescaling of (η, η′, 𝒲).
    epsilon: f64,
}

impl RsgdState {
    /// All replicas share one random ±η initialization.
    pub fn new_shared_random<R: Rng>(
        topology: Topology,
        y: usize,
        eta: f64,
        rng: &mut R,
    ) -> RsgdState {
        let n = topology.n();
        let row: Vec<f64> = (0..n)
            .map(|_| if rng.gen::<bool>() { eta } else { -eta })
            .collect();
        let signs: Vec<i8> = row.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
        let w0 = WeightConfig::from_signs(topology, &signs).unwrap();
        let t = signs.iter().map(|&s| y as i64 * s as i64).collect();
        RsgdState {
            topology,
            y,
            shadow: vec![row; y],
            replicas: vec![w0; y],
            t,
            epsilon: 1e-12 * eta,
        }
    }

    pub fn from_shadow(topology: Topology, shadow: Vec<Vec<f64>>, eta: f64) -> RsgdState {
        let y = shadow.len();
        let n = topology.n();
        let replicas: Vec<WeightConfig> = shadow
            .iter()
            .map(|row| {
                let signs: Vec<i8> = row.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
                WeightConfig::from_signs(topology, &signs).unwrap()
            })
            .collect();
        let t = (0..n)
            .map(|j| replicas.iter().map(|w| w.get(j)).sum())
            .collect();
        RsgdState {
            topology,
            y,
            shadow,
            replicas,
            t,
            epsilon: 1e-12 * eta,
        }
    }

    /// Adds `delta` to the shadow weight of site j of replica a, rebinarizes
    /// that site and keeps T consistent.
    #[inline]
    fn bump(&mut self, a: usize, j: usize, delta: f64) {
        let v = self.shadow[a][j] + delta;
        let v = if v == 0.0 { self.epsilon } else { v };
        self.shadow[a][j] = v;
        let new_sign: i64 = if v >= 0.0 { 1 } else { -1 };
        if new_sign != self.replicas[a].get(j) {
            self.replicas[a].flip(j);
            self.t[j] += 2 * new_sign;
        }
    }

    /// 𝒲^a ← 𝒲^a − η (1/|m|) Σ_{μ∈m} ∇E^μ(W^a), with rebinarization.
    pub fn gradient_step(&mut self, a: usize, minibatch: &[usize], patterns: &PatternSet, eta: f64) {
        let fan_in = self.topology.fan_in();
        let scale = eta * 0.5 / minibatch.len() as f64;
        for &mu in minibatch {
            let units =
                pattern_gradient_units(&self.replicas[a], &patterns.patterns[mu], &self.topology);
            for k in units {
                for i in 0..fan_in {
                    // −η·(−½ξ)/|m| = +η ξ/(2|m|)
                    let d = scale * patterns.input(mu, k, i) as f64;
                    self.bump(a, k * fan_in + i, d);
                }
            }
        }
    }

    /// 𝒲^a ← 𝒲^a + η′·(coupling term), using the current T.
    pub fn interaction_step(
        &mut self,
        a: usize,
        eta_prime: f64,
        gamma: f64,
        variant: InteractionVariant,
    ) {
        if eta_prime == 0.0 {
            return;
        }
        // tanh(γT) takes at most 2y+1 values; precompute per T.
        let y = self.y as i64;
        let table: Vec<f64> = (-y..=y)
            .map(|t| match variant {
                InteractionVariant::ContinuousTrace => t as f64 / y as f64,
                _ => tanh_or_sign(gamma, t),
            })
            .collect();
        let self_coeff = match variant {
            InteractionVariant::Standard | InteractionVariant::ContinuousTrace => 1.0,
            InteractionVariant::HypercubeCorrected => tanh_or_sign(gamma, y),
        };
        for j in 0..self.topology.n() {
            let w = self.replicas[a].get(j) as f64;
            let term = table[(self.t[j] + y) as usize] - self_coeff * w;
            self.bump(a, j, eta_prime * term);
        }
    }

    pub fn error_counts(&self, patterns: &PatternSet) -> Vec<usize> {
        self.replicas
            .iter()
            .map(|w| crate::model::error_count(w, patterns))
            .collect()
    }

    /// Center estimator W̃_j = sign(T_j); sign(0) = +1.
    pub fn center_config(&self) -> WeightConfig {
        let signs: Vec<i8> = self
            .t
            .iter()
            .map(|&t| if t >= 0 { 1 } else { -1 })
            .collect();
        WeightConfig::from_signs(self.topology, &signs).unwrap()
    }
}

/// Full training run; stops at zero training error on any replica or on the
/// center estimator, or at the epoch cap.
pub fn run_rsgd(patterns: &PatternSet, config: &SgdConfig, seed: u64) -> Result<RunRecord, RsgdError> {
    config.validate()?;
    let topology = patterns.topology;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut state = RsgdState::new_shared_random(topology, config.y, config.eta, &mut rng);
    let p = patterns.len();
    let batches_per_replica = p.div_ceil(config.minibatch);

    let mut trace: Vec<TracePoint> = Vec::new();
    let mut status = RunStatus::Timeout;
    let mut epochs_run = 0u64;
    let mut solution: Option<Vec<i8>> = None;

    // per-replica pattern orders, reshuffled each epoch
    let mut orders: Vec<Vec<usize>> = vec![(0..p).collect(); config.y];

    'outer: for epoch in 0..config.max_epochs {
        let gamma = if config.gamma0.is_infinite() {
            f64::INFINITY
        } else {
            config.gamma0 + epoch as f64 * config.dgamma
        };
        for order in orders.iter_mut() {
            order.shuffle(&mut rng);
        }
        // one (replica, minibatch) work item per presentation, in random order
        let mut schedule: Vec<(usize, usize)> = (0..config.y)
            .flat_map(|a| (0..batches_per_replica).map(move |b| (a, b)))
            .collect();
        schedule.shuffle(&mut rng);
        for (a, b) in schedule {
            let lo = b * config.minibatch;
            let hi = (lo + config.minibatch).min(p);
            let batch: Vec<usize> = orders[a][lo..hi].to_vec();
            state.gradient_step(a, &batch, patterns, config.eta);
            state.interaction_step(a, config.eta_prime, gamma, config.variant);
        }
        epochs_run = epoch as u64 + 1;
        let errors = state.error_counts(patterns);
        let (min_a, &replica_err) = errors
            .iter()
            .enumerate()
            .min_by_key(|&(_, &e)| e)
            .unwrap();
        let center = state.center_config();
        let center_err = crate::model::error_count(&center, patterns);
        let min_err = replica_err.min(center_err);
        let mut tp = TracePoint::new();
        tp.insert("epoch".into(), epochs_run as f64);
        tp.insert("min_error".into(), min_err as f64);
        tp.insert("center_error".into(), center_err as f64);
        tp.insert(
            "gamma".into(),
            if gamma.is_infinite() { f64::MAX } else { gamma },
        );
        trace.push(tp);
        if min_err == 0 {
            status = RunStatus::Solved;
            solution = Some(if center_err == 0 {
                center.to_signs()
            } else {
                state.replicas[min_a].to_signs()
            });
            break 'outer;
        }
    }

    let hash = solution.map(|signs| solution_hash(&signs));
    Ok(RunRecord {
        algorithm: "rsgd".into(),
        params: serde_json::json!({
            "n": topology.n(),
            "k": topology.units(),
            "kind": topology.kind().as_str(),
            "alpha": patterns.alpha,
            "pattern_seed": patterns.seed,
            "y": config.y,
            "minibatch": config.minibatch,
            "eta": config.eta,
            "eta_prime": config.eta_prime,
            "gamma0": config.gamma0,
            "dgamma": config.dgamma,
            "max_epochs": config.max_epochs,
            "variant": serde_json::to_value(config.variant).unwrap(),
        }),
        seed,
        status,
        iterations: epochs_run,
        solution_hash: hash,
        trace,
    })
}

#[cfg(test)]
mod tests;
