//! Shared fixtures for the criterion benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use rekit_core::model::{generate_patterns, NetworkKind, PatternSet, Topology};

pub fn committee_patterns(n: usize, k: usize, alpha: f64) -> PatternSet {
    let topology = Topology::new(n, k, NetworkKind::TreeCommittee).unwrap();
    generate_patterns(topology, alpha, 7).unwrap()
}

pub fn perceptron_patterns(n: usize, alpha: f64) -> PatternSet {
    let topology = Topology::new(n, 1, NetworkKind::Perceptron).unwrap();
    generate_patterns(topology, alpha, 7).unwrap()
}

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
