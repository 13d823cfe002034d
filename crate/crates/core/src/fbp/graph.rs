//! Cavity graph for binary perceptron / committee machines: one factor per
//! pattern per hidden unit, one aggregation factor per pattern (K > 1),
//! output clamps folded in, plus the per-synapse self-interaction message.
//! All messages are stored in field representation.

use rand::Rng;

use super::factor::{exact_factor, gaussian_factor};
use super::special::{
    atanh_clamped, atanh_tanh_prod, clamp_field, field_entropy, l2c, H_MAX,
};
use crate::model::{PatternSet, Topology};

/// Largest fan-in for which the first layer uses the exact convolution;
/// beyond it the central-limit form takes over. The second layer (fan-in K)
/// is always exact.
pub const EXACT_FAN_IN_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarMode {
    /// No self-interaction: plain BP.
    Plain,
    /// Coupling to a traced reference at (γ, y).
    Focusing,
    /// Self-field ρ·h_j (soft decimation).
    Reinforced,
}

pub struct CavityGraph {
    pub topology: Topology,
    patterns: PatternSet,
    pub damping: f64,
    pub mode: StarMode,
    pub gamma: f64,
    pub y: f64,
    pub rho: f64,
    /// field from first-layer factor (μ,k) to synapse j: [μ*n + j]
    h_in: Vec<f64>,
    /// field from first-layer factor (μ,k) to its unit output: [μ*k_units + k]
    u_up: Vec<f64>,
    /// field from the aggregation factor μ to unit output k (K > 1 only)
    u_down: Vec<f64>,
    /// self-interaction field into synapse j
    h_star: Vec<f64>,
    /// Σ_μ h_in for synapse j (pattern fields only, star excluded)
    sum_h: Vec<f64>,
    scratch_in: Vec<f64>,
    scratch_xi: Vec<i64>,
}

/// Self-interaction field as a function of the cavity field h_{j→★}:
/// atanh(tanh((y−1)·atanh(tanh(h)·tanhγ))·tanhγ), with the γ=∞ branch
/// reducing to (y−1)h.
pub fn focusing_field(h: f64, gamma: f64, y: f64) -> f64 {
    if gamma == 0.0 || y == 1.0 {
        return 0.0;
    }
    if gamma.is_infinite() {
        return clamp_field((y - 1.0) * h);
    }
    let inner = atanh_tanh_prod(h, gamma);
    atanh_tanh_prod((y - 1.0) * inner, gamma)
}

#[derive(Debug, Clone, Copy)]
pub struct SweepReport {
    pub sweeps: usize,
    pub max_change: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Observables {
    pub q: f64,
    pub s: Option<f64>,
    pub distance: Option<f64>,
    pub local_entropy: Option<f64>,
}

impl CavityGraph {
    pub fn new<R: Rng>(patterns: &PatternSet, damping: f64, noise: f64, rng: &mut R) -> CavityGraph {
        let topology = patterns.topology;
        let n = topology.n();
        let p = patterns.len();
        let k = topology.units();
        let mut h_in = vec![0.0; p * n];
        for h in h_in.iter_mut() {
            *h = rng.gen_range(-noise..=noise);
        }
        let mut g = CavityGraph {
            topology,
            patterns: patterns.clone(),
            damping,
            mode: StarMode::Plain,
            gamma: 0.0,
            y: 1.0,
            rho: 0.0,
            h_in,
            u_up: vec![0.0; p * k],
            u_down: vec![0.0; p * k],
            h_star: vec![0.0; n],
            sum_h: vec![0.0; n],
            scratch_in: Vec::new(),
            scratch_xi: Vec::new(),
        };
        g.refresh_sums();
        g
    }

    pub fn set_plain(&mut self) {
        self.mode = StarMode::Plain;
        self.gamma = 0.0;
        self.y = 1.0;
        self.h_star.iter_mut().for_each(|h| *h = 0.0);
    }

    pub fn set_focusing(&mut self, gamma: f64, y: f64) {
        self.mode = StarMode::Focusing;
        self.gamma = gamma;
        self.y = y;
    }

    pub fn set_reinforced(&mut self, rho: f64) {
        self.mode = StarMode::Reinforced;
        self.rho = rho;
    }

    fn refresh_sums(&mut self) {
        let n = self.topology.n();
        self.sum_h.iter_mut().for_each(|s| *s = 0.0);
        for mu in 0..self.patterns.len() {
            for (j, s) in self.sum_h.iter_mut().enumerate() {
                *s += self.h_in[mu * n + j];
            }
        }
    }

    /// One sweep in pattern order with in-place (damped) writes: each factor
    /// reads the freshest fields, and the variable sums are kept incrementally.
    /// In-place updates are required on the fully-connected committee, where
    /// the units see identical couplings: a fully synchronous sweep preserves
    /// the unit-permutation symmetry and the machine collapses onto an
    /// over-loaded effective perceptron. Returns the largest field change.
    pub fn sweep(&mut self) -> f64 {
        let n = self.topology.n();
        let k_units = self.topology.units();
        let fan_in = self.topology.fan_in();
        let p = self.patterns.len();
        let exact_first = fan_in <= EXACT_FAN_IN_MAX;
        let d = self.damping;
        let mut max_change = 0.0f64;

        for mu in 0..p {
            for k in 0..k_units {
                self.scratch_in.clear();
                self.scratch_xi.clear();
                for i in 0..fan_in {
                    let j = k * fan_in + i;
                    let cav = self.sum_h[j] + self.h_star[j] - self.h_in[mu * n + j];
                    self.scratch_in.push(cav.tanh());
                    self.scratch_xi.push(self.patterns.input(mu, k, i));
                }
                let m_tau = if k_units == 1 {
                    1.0
                } else {
                    self.u_down[mu * k_units + k].tanh()
                };
                let (h_out, to_in) = if exact_first {
                    let (m, v) = exact_factor(&self.scratch_in, &self.scratch_xi, m_tau);
                    (atanh_clamped(m), v)
                } else {
                    gaussian_factor(&self.scratch_in, &self.scratch_xi, m_tau)
                };
                let slot = mu * k_units + k;
                let v = clamp_field(d * self.u_up[slot] + (1.0 - d) * h_out);
                max_change = max_change.max((v - self.u_up[slot]).abs());
                self.u_up[slot] = v;
                for (i, m) in to_in.into_iter().enumerate() {
                    let j = k * fan_in + i;
                    let slot = mu * n + j;
                    let v = clamp_field(d * self.h_in[slot] + (1.0 - d) * atanh_clamped(m));
                    max_change = max_change.max((v - self.h_in[slot]).abs());
                    self.sum_h[j] += v - self.h_in[slot];
                    self.h_in[slot] = v;
                }
            }
            if k_units > 1 {
                let ms: Vec<f64> = (0..k_units)
                    .map(|k| self.u_up[mu * k_units + k].tanh())
                    .collect();
                let ones = vec![1i64; k_units];
                let (_, to_in) = exact_factor(&ms, &ones, 1.0);
                for (k, m) in to_in.into_iter().enumerate() {
                    let slot = mu * k_units + k;
                    let v = clamp_field(d * self.u_down[slot] + (1.0 - d) * atanh_clamped(m));
                    max_change = max_change.max((v - self.u_down[slot]).abs());
                    self.u_down[slot] = v;
                }
            }
        }
        // incremental sums accumulate rounding drift over thousands of sweeps
        self.refresh_sums();

        for j in 0..n {
            let new = match self.mode {
                StarMode::Plain => 0.0,
                StarMode::Focusing => focusing_field(self.sum_h[j], self.gamma, self.y),
                StarMode::Reinforced => self.rho * (self.sum_h[j] + self.h_star[j]),
            };
            let v = clamp_field(d * self.h_star[j] + (1.0 - d) * new);
            max_change = max_change.max((v - self.h_star[j]).abs());
            self.h_star[j] = v;
        }
        max_change
    }

    pub fn iterate(&mut self, max_sweeps: usize, tol: f64) -> SweepReport {
        let mut max_change = f64::INFINITY;
        for sweep in 1..=max_sweeps {
            max_change = self.sweep();
            if max_change < tol {
                return SweepReport { sweeps: sweep, max_change, converged: true };
            }
        }
        SweepReport { sweeps: max_sweeps, max_change, converged: false }
    }

    /// Single-site magnetizations tanh(Σ_ν h_{ν→j} + h_{★→j}).
    pub fn magnetizations(&self) -> Vec<f64> {
        self.sum_h
            .iter()
            .zip(&self.h_star)
            .map(|(&s, &h)| (s + h).tanh())
            .collect()
    }

    /// Clamped weights sign(m_j), with sign(0) = +1.
    pub fn clamped_weights(&self) -> Vec<i8> {
        self.magnetizations()
            .iter()
            .map(|&m| if m >= 0.0 { 1 } else { -1 })
            .collect()
    }

    /// Bethe log-partition-function of the replicated system (replica
    /// symmetric across the y copies), in the edge form Σ_f ln Z_f +
    /// Σ_v ln Z_v − Σ_e ln Z_e. Finite γ only.
    pub fn bethe_free_entropy(&self) -> f64 {
        let n = self.topology.n();
        let k_units = self.topology.units();
        let p = self.patterns.len();
        let y = self.y;
        let gamma = self.gamma;
        let mut f = KahanSum::new();

        for j in 0..n {
            let hs = self.sum_h[j];
            let big_h = hs + self.h_star[j];
            // variable term and pattern edges telescope into this form
            let mut site = l2c(hs);
            for mu in 0..p {
                site += l2c(big_h - self.h_in[mu * n + j]) - l2c(big_h);
            }
            f.add(y * site);
            // interaction factors and their reference-side edges collapse to
            // y·ln(2coshγ); the reference variable adds ln Z with field ĥ.
            let h_hat = atanh_tanh_prod(hs, gamma);
            f.add(y * l2c(gamma));
            f.add(l2c(y * h_hat) - y * l2c(h_hat));
        }

        for mu in 0..p {
            if k_units == 1 {
                let u = self.u_up[mu];
                f.add(y * (u - l2c(u)));
            } else {
                let ms: Vec<f64> = (0..k_units)
                    .map(|k| self.u_up[mu * k_units + k].tanh())
                    .collect();
                let ones = vec![1i64; k_units];
                let (m2, _) = exact_factor(&ms, &ones, 0.0);
                f.add(y * (((1.0 + m2) / 2.0).max(1e-300)).ln());
            }
        }
        f.value()
    }

    /// Overlap between replicas and reference:
    /// S = ⟨(m_{j→★} m_{★→j} + tanhγ)/(1 + m_{j→★} m_{★→j} tanhγ)⟩.
    pub fn reference_overlap(&self) -> f64 {
        let tg = if self.gamma.is_infinite() { 1.0 } else { self.gamma.tanh() };
        let n = self.topology.n();
        let mut s = 0.0;
        for j in 0..n {
            let prod = self.sum_h[j].tanh() * self.h_star[j].tanh();
            s += (prod + tg) / (1.0 + prod * tg);
        }
        s / n as f64
    }

    pub fn observables(&self) -> Observables {
        let n = self.topology.n();
        let q = self.magnetizations().iter().map(|m| m * m).sum::<f64>() / n as f64;
        if self.mode == StarMode::Reinforced || self.gamma.is_infinite() {
            return Observables { q, s: None, distance: None, local_entropy: None };
        }
        let s = self.reference_overlap();
        let distance = (1.0 - s) / 2.0;
        let f = self.bethe_free_entropy();
        let h_ref: f64 = (0..n)
            .map(|j| field_entropy(self.y * atanh_tanh_prod(self.sum_h[j], self.gamma)))
            .sum();
        let local_entropy = (f - h_ref) / (n as f64 * self.y) - self.gamma * s;
        Observables { q, s: Some(s), distance: Some(distance), local_entropy: Some(local_entropy) }
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    /// Max |field| headroom check used in tests.
    pub fn fields_bounded(&self) -> bool {
        self.h_in.iter().chain(&self.u_up).chain(&self.u_down).chain(&self.h_star)
            .all(|h| h.is_finite() && h.abs() <= H_MAX + 1e-9)
    }
}

/// Compensated accumulator for the Bethe sums, which mix O(1) terms with
/// near-cancelling large-field contributions.
struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn new() -> KahanSum {
        KahanSum { sum: 0.0, c: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = x - self.c;
        let s = self.sum + t;
        self.c = (s - self.sum) - t;
        self.sum = s;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}
