//! The replicated system state and the index-class bookkeeping used by the
//! biased move proposal.

use rand::Rng;

use crate::model::{sign, PatternCache, PatternSet, Topology, WeightConfig};

use super::phi::PhiTable;
use super::{interaction_field, logcosh};

/// y coupled replicas with their pattern caches and the per-site replica sum
/// T_j = Σ_a W_j^a.
#[derive(Debug, Clone)]
pub struct ReplicaSystem {
    pub y: usize,
    pub replicas: Vec<WeightConfig>,
    pub caches: Vec<PatternCache>,
    pub t: Vec<i64>,
}

impl ReplicaSystem {
    /// All replicas start from one shared random configuration.
    pub fn new_shared_random<R: Rng>(
        patterns: &PatternSet,
        y: usize,
        rng: &mut R,
    ) -> ReplicaSystem {
        let topology = patterns.topology;
        let w0 = crate::model::random_weights(topology, rng);
        let cache0 = PatternCache::new(&w0, patterns);
        let t: Vec<i64> = (0..topology.n()).map(|j| y as i64 * w0.get(j)).collect();
        ReplicaSystem {
            y,
            replicas: vec![w0; y],
            caches: vec![cache0; y],
            t,
        }
    }

    #[inline]
    pub fn topology(&self) -> &Topology {
        self.replicas[0].topology()
    }

    pub fn energies(&self) -> Vec<i64> {
        self.caches.iter().map(|c| c.total_energy()).collect()
    }

    pub fn min_energy(&self) -> i64 {
        self.caches.iter().map(|c| c.total_energy()).min().unwrap()
    }

    /// W̃_j = sign(T_j), the most probable reference configuration.
    pub fn center_config(&self) -> WeightConfig {
        let topology = *self.topology();
        let signs: Vec<i8> = self.t.iter().map(|&t| sign(t) as i8).collect();
        WeightConfig::from_signs(topology, &signs).unwrap()
    }

    /// p = W_j^a T_j − 1 = W_j^a Σ_{b≠a} W_j^b, the alignment of site j of
    /// replica a with the other replicas; even, in [−(y−1), y−1].
    #[inline]
    pub fn p_value(&self, a: usize, j: usize) -> i64 {
        self.replicas[a].get(j) * self.t[j] - 1
    }

    /// Field k_j acting on site j of replica a (replica's own spin excluded).
    pub fn field(&self, a: usize, j: usize, gamma: f64) -> f64 {
        interaction_field(self.t[j], self.replicas[a].get(j), gamma)
    }

    /// Flips site j of replica a, keeping cache and T consistent.
    pub fn flip(&mut self, patterns: &PatternSet, a: usize, j: usize) {
        let (k, i) = self.topology().split(j);
        let w_old = self.replicas[a].get(j);
        self.caches[a].apply_flip(patterns, &mut self.replicas[a], k, i);
        self.t[j] -= 2 * w_old;
    }
}

/// Class values and φ tables at the current (γ, y); rebuilt on γ changes.
///
/// Classes are indexed by p through idx = (p + y − 1)/2 ∈ [0, y).
pub struct ClassValues {
    pub y: usize,
    pub gamma: f64,
    /// c(p) = W k_j for a site with alignment p.
    pub c_of_idx: Vec<f64>,
    /// λ = e^{−2c}, for classes with p > 0.
    lambda_of_idx: Vec<f64>,
    tables: Vec<Option<PhiTable>>,
}

impl ClassValues {
    pub fn new(y: usize, gamma: f64) -> ClassValues {
        let mut c_of_idx = Vec::with_capacity(y);
        let mut lambda_of_idx = vec![0.0; y];
        let mut tables = Vec::with_capacity(y);
        for idx in 0..y {
            let p = Self::p_of(idx, y);
            // c(p) = ½ log(cosh(γ(p+1)) / cosh(γ(p−1)))
            let c = 0.5 * (logcosh(gamma * (p + 1) as f64) - logcosh(gamma * (p - 1) as f64));
            c_of_idx.push(c);
            if p > 0 {
                lambda_of_idx[idx] = (-2.0 * c).exp();
                tables.push(Some(PhiTable::new(lambda_of_idx[idx])));
            } else {
                tables.push(None);
            }
        }
        ClassValues {
            y,
            gamma,
            c_of_idx,
            lambda_of_idx,
            tables,
        }
    }

    #[inline]
    pub fn idx_of(p: i64, y: usize) -> usize {
        ((p + y as i64 - 1) / 2) as usize
    }

    #[inline]
    pub fn p_of(idx: usize, y: usize) -> i64 {
        2 * idx as i64 - (y as i64 - 1)
    }

    #[inline]
    pub fn lambda(&self, idx_pos: usize) -> f64 {
        self.lambda_of_idx[idx_pos]
    }

    pub fn phi(&mut self, idx_pos: usize, n: usize, q: usize) -> f64 {
        self.tables[idx_pos].as_mut().unwrap().eval(n, q)
    }
}

/// Unsorted partition of sites into classes, per replica, with a position
/// lookup table; all moves are O(1).
pub struct ClassPartition {
    lists: Vec<Vec<Vec<u32>>>,
    pos: Vec<Vec<u32>>,
    idx: Vec<Vec<u16>>,
}

impl ClassPartition {
    pub fn new(system: &ReplicaSystem) -> ClassPartition {
        let y = system.y;
        let n = system.topology().n();
        let mut lists = vec![vec![Vec::new(); y]; y];
        let mut pos = vec![vec![0u32; n]; y];
        let mut idx = vec![vec![0u16; n]; y];
        for a in 0..y {
            for j in 0..n {
                let c_idx = ClassValues::idx_of(system.p_value(a, j), y);
                pos[a][j] = lists[a][c_idx].len() as u32;
                idx[a][j] = c_idx as u16;
                lists[a][c_idx].push(j as u32);
            }
        }
        ClassPartition { lists, pos, idx }
    }

    #[inline]
    pub fn class_of(&self, a: usize, j: usize) -> usize {
        self.idx[a][j] as usize
    }

    #[inline]
    pub fn class_len(&self, a: usize, c_idx: usize) -> usize {
        self.lists[a][c_idx].len()
    }

    #[inline]
    pub fn class_member(&self, a: usize, c_idx: usize, rank: usize) -> usize {
        self.lists[a][c_idx][rank] as usize
    }

    fn move_site(&mut self, a: usize, j: usize, new_idx: usize) {
        let old_idx = self.idx[a][j] as usize;
        if old_idx == new_idx {
            return;
        }
        let p = self.pos[a][j] as usize;
        let list = &mut self.lists[a][old_idx];
        let last = *list.last().unwrap() as usize;
        list[p] = last as u32;
        self.pos[a][last] = p as u32;
        list.pop();
        self.pos[a][j] = self.lists[a][new_idx].len() as u32;
        self.lists[a][new_idx].push(j as u32);
        self.idx[a][j] = new_idx as u16;
    }

    /// Registers the flip of site j of replica a. Must be called *after*
    /// `ReplicaSystem::flip`; `w_old` is the flipped replica's previous spin.
    pub fn apply_flip(&mut self, system: &ReplicaSystem, a: usize, j: usize, w_old: i64) {
        let y = system.y;
        for b in 0..y {
            let p_new = if b == a {
                -(ClassValues::p_of(self.idx[b][j] as usize, y))
            } else {
                ClassValues::p_of(self.idx[b][j] as usize, y) - 2 * w_old * system.replicas[b].get(j)
            };
            self.move_site(b, j, ClassValues::idx_of(p_new, y));
        }
    }
}
