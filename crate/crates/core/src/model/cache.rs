//! Per-pattern auxiliary state for O(1) single-flip energy shifts.

use super::{sign, Pattern, PatternSet, WeightConfig};

/// Cached fields for one pattern: unit fields, output field, sorted repair
/// costs of the violated units, and the resulting energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternState {
    pub deltas: Vec<i64>,
    pub delta_out: i64,
    /// Repair costs (1−Δ_k)/2 of all violated units, ascending.
    pub s: Vec<i64>,
    pub energy: i64,
}

impl PatternState {
    fn build(w: &WeightConfig, pattern: &Pattern) -> PatternState {
        let topology = w.topology();
        let units = topology.units();
        let mut deltas = Vec::with_capacity(units);
        let mut delta_out = 0i64;
        let mut s: Vec<i64> = Vec::new();
        for k in 0..units {
            let d = w.unit_dot(pattern, k);
            deltas.push(d);
            delta_out += sign(d);
            if d < 0 {
                s.push((1 - d) / 2);
            }
        }
        s.sort_unstable();
        let energy = if delta_out < 0 {
            let c = ((1 - delta_out) / 2) as usize;
            s[..c].iter().sum()
        } else {
            0
        };
        PatternState {
            deltas,
            delta_out,
            s,
            energy,
        }
    }

    /// Number of units that must change sign, defined when Δ_out < 0.
    #[inline]
    pub fn c(&self) -> usize {
        debug_assert!(self.delta_out < 0);
        ((1 - self.delta_out) / 2) as usize
    }

    /// Tie between the c-th and (c+1)-th cheapest violated units.
    #[inline]
    pub fn chi(&self) -> bool {
        let c = self.c();
        c < self.s.len() && self.s[c - 1] == self.s[c]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCache {
    states: Vec<PatternState>,
    total_energy: i64,
}

impl PatternCache {
    pub fn new(w: &WeightConfig, patterns: &PatternSet) -> PatternCache {
        let states: Vec<PatternState> = patterns
            .patterns
            .iter()
            .map(|p| PatternState::build(w, p))
            .collect();
        let total_energy = states.iter().map(|st| st.energy).sum();
        PatternCache {
            states,
            total_energy,
        }
    }

    #[inline]
    pub fn total_energy(&self) -> i64 {
        self.total_energy
    }

    #[inline]
    pub fn state(&self, mu: usize) -> &PatternState {
        &self.states[mu]
    }

    /// E^μ(flip(w,k,i)) − E^μ(w) in O(1).
    ///
    /// The printed pseudo-code accepts any positive Δ_k in the Δ_out=1
    /// branch, but only Δ_k=1 changes sign under a single flip; the exact
    /// condition is used here (checked against brute force in tests).
    pub fn energy_shift(
        &self,
        patterns: &PatternSet,
        w: &WeightConfig,
        mu: usize,
        k: usize,
        i: usize,
    ) -> i64 {
        let st = &self.states[mu];
        if w.topology().units() == 1 {
            // Single layer: the unit field doubles as Δ_out, E = (1−Δ)/2 if Δ<0.
            let delta = st.deltas[0];
            let d = -patterns.input(mu, 0, i) * w.get_ki(0, i);
            let new = delta + 2 * d;
            let before = if delta < 0 { (1 - delta) / 2 } else { 0 };
            let after = if new < 0 { (1 - new) / 2 } else { 0 };
            return after - before;
        }
        let dk = st.deltas[k];
        if st.delta_out == 1 {
            if patterns.input(mu, k, i) != w.get_ki(k, i) {
                return 0;
            }
            if dk != 1 {
                return 0;
            }
            1
        } else if st.delta_out < 0 {
            if dk > 1 {
                return 0;
            }
            let d = -patterns.input(mu, k, i) * w.get_ki(k, i);
            if dk > 0 && d == 1 {
                return 0;
            }
            if dk == 1 {
                return 1;
            }
            let v = -(dk + 1) / 2 + 1;
            let c = st.c();
            let sc = st.s[c - 1];
            if v > sc {
                return 0;
            }
            if v < sc {
                return -d;
            }
            if d == 1 {
                return -1;
            }
            if st.chi() {
                return 0;
            }
            1
        } else {
            0
        }
    }

    /// Total energy shift of flipping synapse (k,i), summed over patterns.
    pub fn total_shift(&self, patterns: &PatternSet, w: &WeightConfig, k: usize, i: usize) -> i64 {
        (0..self.states.len())
            .map(|mu| self.energy_shift(patterns, w, mu, k, i))
            .sum()
    }

    /// Flips synapse (k,i) in `w` and refreshes every pattern state.
    pub fn apply_flip(&mut self, patterns: &PatternSet, w: &mut WeightConfig, k: usize, i: usize) {
        let w_old = w.get_ki(k, i);
        w.flip_ki(k, i);
        for (mu, st) in self.states.iter_mut().enumerate() {
            let shift = -2 * patterns.input(mu, k, i) * w_old;
            let old_dk = st.deltas[k];
            let new_dk = old_dk + shift;
            st.deltas[k] = new_dk;
            st.delta_out += sign(new_dk) - sign(old_dk);
            if old_dk < 0 || new_dk < 0 {
                let old_cost = (1 - old_dk) / 2;
                let new_cost = (1 - new_dk) / 2;
                if old_dk < 0 {
                    let pos = st.s.iter().position(|&x| x == old_cost).unwrap();
                    st.s.remove(pos);
                }
                if new_dk < 0 {
                    let pos = st.s.partition_point(|&x| x < new_cost);
                    st.s.insert(pos, new_cost);
                }
            }
            let old_energy = st.energy;
            st.energy = if st.delta_out < 0 {
                let c = ((1 - st.delta_out) / 2) as usize;
                st.s[..c].iter().sum()
            } else {
                0
            };
            self.total_energy += st.energy - old_energy;
        }
    }
}
