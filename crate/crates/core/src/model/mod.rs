//! Network topology, pattern generation and the minimal-flip energy.
//!
//! Weights and pattern entries are binary (±1) and stored bit-packed, one
//! block of words per hidden unit. A set bit encodes the value −1, so the
//! dot product between a weight block and a pattern block is
//! `fan_in − 2·popcount(xor)`.

mod cache;
mod io;

pub use cache::PatternCache;
pub use io::{load_patterns, save_patterns};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("K must be a positive odd integer, got {0}")]
    BadUnitCount(usize),
    #[error("N={n} must be divisible by K={k} with N/K odd")]
    BadSynapseCount { n: usize, k: usize },
    #[error("perceptron topology requires K=1, got {0}")]
    PerceptronUnitCount(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("pattern file is malformed: {0}")]
    BadPatternFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetworkKind {
    Perceptron,
    FullyConnectedCommittee,
    TreeCommittee,
}

impl NetworkKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NetworkKind::Perceptron => "perceptron",
            NetworkKind::FullyConnectedCommittee => "committee",
            NetworkKind::TreeCommittee => "tree",
        }
    }

    pub fn parse(s: &str) -> Option<NetworkKind> {
        match s {
            "perceptron" => Some(NetworkKind::Perceptron),
            "committee" => Some(NetworkKind::FullyConnectedCommittee),
            "tree" => Some(NetworkKind::TreeCommittee),
            _ => None,
        }
    }
}

/// `sign` with the fixed convention `sign(0) = +1`.
#[inline]
pub fn sign(x: i64) -> i64 {
    if x >= 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    n: usize,
    k: usize,
    kind: NetworkKind,
}

impl Topology {
    pub fn new(n: usize, k: usize, kind: NetworkKind) -> Result<Topology, ModelError> {
        if k == 0 || k % 2 == 0 {
            return Err(ModelError::BadUnitCount(k));
        }
        if kind == NetworkKind::Perceptron && k != 1 {
            return Err(ModelError::PerceptronUnitCount(k));
        }
        if n == 0 || n % k != 0 || (n / k) % 2 == 0 {
            return Err(ModelError::BadSynapseCount { n, k });
        }
        Ok(Topology { n, k, kind })
    }

    /// Constructor without the oddness checks. Exact-enumeration tests use
    /// tiny even sizes; `sign(0) = +1` keeps every quantity well defined.
    pub fn new_relaxed(n: usize, k: usize, kind: NetworkKind) -> Result<Topology, ModelError> {
        if k == 0 {
            return Err(ModelError::BadUnitCount(k));
        }
        if kind == NetworkKind::Perceptron && k != 1 {
            return Err(ModelError::PerceptronUnitCount(k));
        }
        if n == 0 || n % k != 0 {
            return Err(ModelError::BadSynapseCount { n, k });
        }
        Ok(Topology { n, k, kind })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn units(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn fan_in(&self) -> usize {
        self.n / self.k
    }

    #[inline]
    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    #[inline]
    pub fn words_per_unit(&self) -> usize {
        (self.fan_in() + 63) / 64
    }

    /// Splits a flat synapse index into (unit, channel).
    #[inline]
    pub fn split(&self, j: usize) -> (usize, usize) {
        (j / self.fan_in(), j % self.fan_in())
    }
}

/// A ±1 vector packed into 64-bit words, one block per unit.
/// Bit set ⇔ value −1. Tail bits of each block stay zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    topology: Topology,
}

impl BitVec {
    pub fn zeros(topology: Topology) -> BitVec {
        BitVec {
            words: vec![0; topology.units() * topology.words_per_unit()],
            topology,
        }
    }

    pub fn from_signs(topology: Topology, signs: &[i8]) -> Result<BitVec, ModelError> {
        if signs.len() != topology.n() {
            return Err(ModelError::DimensionMismatch {
                expected: topology.n(),
                got: signs.len(),
            });
        }
        let mut v = BitVec::zeros(topology);
        for (j, &s) in signs.iter().enumerate() {
            if s < 0 {
                v.flip(j);
            }
        }
        Ok(v)
    }

    #[inline]
    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    #[inline]
    fn bit_pos(&self, k: usize, i: usize) -> (usize, u64) {
        let w = k * self.topology.words_per_unit() + i / 64;
        (w, 1u64 << (i % 64))
    }

    #[inline]
    pub fn get_ki(&self, k: usize, i: usize) -> i64 {
        let (w, m) = self.bit_pos(k, i);
        if self.words[w] & m != 0 {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn get(&self, j: usize) -> i64 {
        let (k, i) = self.topology.split(j);
        self.get_ki(k, i)
    }

    #[inline]
    pub fn flip_ki(&mut self, k: usize, i: usize) {
        let (w, m) = self.bit_pos(k, i);
        self.words[w] ^= m;
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        let (k, i) = self.topology.split(j);
        self.flip_ki(k, i);
    }

    /// Dot product of unit `k` of `self` with unit `k` of `other`.
    #[inline]
    pub fn unit_dot(&self, other: &BitVec, k: usize) -> i64 {
        let wpu = self.topology.words_per_unit();
        let a = &self.words[k * wpu..(k + 1) * wpu];
        let b = &other.words[k * wpu..(k + 1) * wpu];
        let mut disagree = 0u32;
        for (x, y) in a.iter().zip(b) {
            disagree += (x ^ y).count_ones();
        }
        self.topology.fan_in() as i64 - 2 * disagree as i64
    }

    pub fn to_signs(&self) -> Vec<i8> {
        (0..self.topology.n()).map(|j| self.get(j) as i8).collect()
    }

    pub fn hamming(&self, other: &BitVec) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }
}

/// A binary weight assignment for the whole network.
pub type WeightConfig = BitVec;

/// One training pattern (inputs already multiplied by the desired output).
pub type Pattern = BitVec;

#[derive(Debug, Clone)]
pub struct PatternSet {
    pub topology: Topology,
    pub alpha: f64,
    pub seed: u64,
    pub patterns: Vec<Pattern>,
}

impl PatternSet {
    #[inline]
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Sign of input channel `i` of unit `k` in pattern `mu`.
    #[inline]
    pub fn input(&self, mu: usize, k: usize, i: usize) -> i64 {
        self.patterns[mu].get_ki(k, i)
    }
}

/// Random i.i.d. ±1 patterns, outputs folded in at generation time.
pub fn generate_patterns(
    topology: Topology,
    alpha: f64,
    seed: u64,
) -> Result<PatternSet, ModelError> {
    if !(alpha > 0.0) {
        return Err(ModelError::NonPositiveAlpha(alpha));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let count = (alpha * topology.n() as f64).round() as usize;
    let fan_in = topology.fan_in();
    let units = topology.units();
    let mut patterns = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = BitVec::zeros(topology);
        let shared = topology.kind() == NetworkKind::FullyConnectedCommittee;
        let drawn_units = if shared { 1 } else { units };
        for k in 0..drawn_units {
            for i in 0..fan_in {
                if rng.gen::<bool>() {
                    p.flip_ki(k, i);
                }
            }
        }
        if shared {
            for k in 1..units {
                for i in 0..fan_in {
                    if p.get_ki(0, i) < 0 {
                        p.flip_ki(k, i);
                    }
                }
            }
        }
        // Fold the desired output into the inputs: (ξ, σ_D) ↦ (σ_D ξ, +1).
        let sigma_d: bool = rng.gen();
        if sigma_d {
            for k in 0..units {
                for i in 0..fan_in {
                    p.flip_ki(k, i);
                }
            }
        }
        patterns.push(p);
    }
    Ok(PatternSet {
        topology,
        alpha,
        seed,
        patterns,
    })
}

/// ζ = sign(Σ_k sign(ξ^k·W^k)).
pub fn network_output(w: &WeightConfig, pattern: &Pattern, topology: &Topology) -> i64 {
    let mut total = 0i64;
    for k in 0..topology.units() {
        total += sign(w.unit_dot(pattern, k));
    }
    sign(total)
}

/// Minimum number of synapse flips needed to classify the pattern correctly.
pub fn pattern_energy(w: &WeightConfig, pattern: &Pattern, topology: &Topology) -> i64 {
    if topology.units() == 1 {
        let delta = w.unit_dot(pattern, 0);
        return relu_cost(-delta);
    }
    let mut delta_out = 0i64;
    let mut costs: Vec<i64> = Vec::new();
    for k in 0..topology.units() {
        let d = w.unit_dot(pattern, k);
        delta_out += sign(d);
        if d < 0 {
            costs.push(-(d - 1) / 2);
        }
    }
    if delta_out >= 0 {
        return 0;
    }
    costs.sort_unstable();
    let c = ((-delta_out + 1) / 2) as usize;
    costs[..c].iter().sum()
}

/// R(x) = ½(x+1)Θ(x), the single-layer pattern energy at argument −Δ_out.
#[inline]
pub fn relu_cost(x: i64) -> i64 {
    if x > 0 {
        (x + 1) / 2
    } else {
        0
    }
}

pub fn total_energy(w: &WeightConfig, patterns: &PatternSet) -> i64 {
    patterns
        .patterns
        .iter()
        .map(|p| pattern_energy(w, p, &patterns.topology))
        .sum()
}

/// Number of misclassified patterns (the error count, not the energy).
pub fn error_count(w: &WeightConfig, patterns: &PatternSet) -> usize {
    patterns
        .patterns
        .iter()
        .filter(|p| network_output(w, p, &patterns.topology) != 1)
        .count()
}

/// ½ Σ_j (W_j^a − W_j^b)² = 2·Hamming distance.
pub fn replica_distance(wa: &WeightConfig, wb: &WeightConfig) -> Result<u64, ModelError> {
    if wa.topology() != wb.topology() {
        return Err(ModelError::DimensionMismatch {
            expected: wa.topology().n(),
            got: wb.topology().n(),
        });
    }
    Ok(2 * wa.hamming(wb))
}

pub fn random_weights<R: Rng>(topology: Topology, rng: &mut R) -> WeightConfig {
    let mut w = BitVec::zeros(topology);
    for k in 0..topology.units() {
        for i in 0..topology.fan_in() {
            if rng.gen::<bool>() {
                w.flip_ki(k, i);
            }
        }
    }
    w
}

#[cfg(test)]
mod tests;
