//! Cavity message passing on K-SAT factor graphs.
//!
//! Parametrization: per clause-to-variable edge a scalar η_{μ→i} ∈ [0,1],
//! the relative weight the clause puts on the value of σ_i that violates
//! its literal (the satisfying side carries weight 1). A variable's weight
//! for σ_i = s is then π̃_s · Π_{ν ∈ ∂^{−s}i} η_{ν→i}, where ∂^± i are the
//! clauses holding i with coupling ±1 and π̃ is the external prior (all
//! ones for plain BP, a reinforcement or replica-coupling bias otherwise).
//! Variable-to-clause messages ζ_{i→μ} = P_{i→μ}(σ_i ≠ J_{μi}) close the
//! loop through η_{μ→i} = 1 − Π_{j ∈ ∂μ∖i} ζ_{j→μ}.
//!
//! Side products are accumulated in log space with an explicit zero count
//! so that exactly-zero messages (forced variables) stay representable.

use rand::Rng;

use super::instance::KSatInstance;
use crate::fbp::graph::focusing_field;
use crate::fbp::special::clamp_field;

/// Both spin values for some variable carry zero weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contradiction;

/// Log-weights below this count as zero; with damping an impossible side
/// only decays geometrically, so exact zero is reached via underflow and
/// this threshold catches it early.
const LN_ZERO: f64 = -690.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KSatStarMode {
    /// π̃ ≡ 1.
    Plain,
    /// π̃_± = (full marginal of ±)^ρ, recomputed each sweep.
    Reinforced { rho: f64 },
    /// π̃_± = 1 ± m_{★→i} with the replica-coupling message obtained by
    /// focusing the star-cavity magnetization.
    Focusing { gamma: f64, y: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct KSatSweepReport {
    pub sweeps: usize,
    pub max_change: f64,
    pub converged: bool,
}

/// Per-variable, per-sign product of incoming η: Σ ln η over the non-zero
/// factors plus a count of exact zeros.
#[derive(Debug, Clone, Copy, Default)]
struct SideProduct {
    sum_ln: f64,
    zeros: u32,
}

impl SideProduct {
    fn log(&self) -> f64 {
        if self.zeros > 0 {
            f64::NEG_INFINITY
        } else {
            self.sum_ln
        }
    }

    /// Log of the product with one factor removed.
    fn log_excluding(&self, eta: f64) -> f64 {
        if eta == 0.0 {
            if self.zeros > 1 {
                f64::NEG_INFINITY
            } else {
                self.sum_ln
            }
        } else if self.zeros > 0 {
            f64::NEG_INFINITY
        } else {
            self.sum_ln - eta.ln()
        }
    }
}

pub struct KSatGraph {
    instance: KSatInstance,
    /// (clause, position) pairs holding each variable.
    adjacency: Vec<Vec<(usize, usize)>>,
    mode: KSatStarMode,
    damping: f64,
    /// η_{μ→i}, indexed like the clause literal lists.
    eta: Vec<Vec<f64>>,
    zeta: Vec<Vec<f64>>,
    /// π̃ per variable: [weight bias for +1, for −1].
    pi_tilde: Vec<[f64; 2]>,
    /// Π η over ∂^+ i and ∂^- i.
    prod: Vec<[SideProduct; 2]>,
}

fn side_index(j: i8) -> usize {
    if j > 0 {
        0
    } else {
        1
    }
}

impl KSatGraph {
    pub fn new<R: Rng>(instance: &KSatInstance, damping: f64, init_noise: f64, rng: &mut R) -> KSatGraph {
        let mut adjacency = vec![Vec::new(); instance.n];
        for (mu, c) in instance.clauses.iter().enumerate() {
            for (pos, &v) in c.vars.iter().enumerate() {
                adjacency[v].push((mu, pos));
            }
        }
        let eta: Vec<Vec<f64>> = instance
            .clauses
            .iter()
            .map(|c| {
                c.vars
                    .iter()
                    .map(|_| (0.5 + rng.gen_range(-init_noise..=init_noise)).clamp(1e-3, 1.0 - 1e-3))
                    .collect()
            })
            .collect();
        let zeta = eta.clone();
        let mut graph = KSatGraph {
            instance: instance.clone(),
            adjacency,
            mode: KSatStarMode::Plain,
            damping,
            eta,
            zeta,
            pi_tilde: vec![[1.0, 1.0]; instance.n],
            prod: vec![[SideProduct::default(); 2]; instance.n],
        };
        graph.refresh_products();
        graph
    }

    pub fn set_mode(&mut self, mode: KSatStarMode) {
        self.mode = mode;
    }

    pub fn instance(&self) -> &KSatInstance {
        &self.instance
    }

    pub fn eta(&self) -> &[Vec<f64>] {
        &self.eta
    }

    fn refresh_products(&mut self) {
        for (i, edges) in self.adjacency.iter().enumerate() {
            let mut prod = [SideProduct::default(); 2];
            for &(mu, pos) in edges {
                let side = side_index(self.instance.clauses[mu].j[pos]);
                let eta = self.eta[mu][pos];
                if eta == 0.0 {
                    prod[side].zeros += 1;
                } else {
                    prod[side].sum_ln += eta.ln();
                }
            }
            self.prod[i] = prod;
        }
    }

    /// One synchronous sweep: all ζ from the current η and π̃, then all η
    /// with damping, then the π̃ refresh for the active mode. Returns the
    /// largest η change.
    pub fn sweep(&mut self) -> Result<f64, Contradiction> {
        // ζ_{i→μ} = w(σ_i = −J) / (w(−J) + w(J)); the side the edge's own
        // clause couples to loses that clause's η from its product.
        for mu in 0..self.instance.clauses.len() {
            for pos in 0..self.instance.clauses[mu].vars.len() {
                let i = self.instance.clauses[mu].vars[pos];
                let j = self.instance.clauses[mu].j[pos];
                let own = side_index(j);
                let other = 1 - own;
                let a = self.pi_tilde[i][other].ln()
                    + self.prod[i][own].log_excluding(self.eta[mu][pos]);
                let b = self.pi_tilde[i][own].ln() + self.prod[i][other].log();
                if a.max(b) < LN_ZERO {
                    return Err(Contradiction);
                }
                self.zeta[mu][pos] = 1.0 / (1.0 + (b - a).exp());
            }
        }

        let mut max_change: f64 = 0.0;
        for mu in 0..self.instance.clauses.len() {
            let k = self.instance.clauses[mu].vars.len();
            for pos in 0..k {
                let mut others = 1.0;
                for q in 0..k {
                    if q != pos {
                        others *= self.zeta[mu][q];
                    }
                }
                let fresh = 1.0 - others;
                let old = self.eta[mu][pos];
                let new = self.damping * old + (1.0 - self.damping) * fresh;
                max_change = max_change.max((new - old).abs());
                self.eta[mu][pos] = new;
            }
        }
        self.refresh_products();
        self.update_pi_tilde()?;
        Ok(max_change)
    }

    fn update_pi_tilde(&mut self) -> Result<(), Contradiction> {
        match self.mode {
            KSatStarMode::Plain => {}
            KSatStarMode::Reinforced { rho } => {
                for i in 0..self.instance.n {
                    let a = self.pi_tilde[i][0].ln() + self.prod[i][1].log();
                    let b = self.pi_tilde[i][1].ln() + self.prod[i][0].log();
                    let top = a.max(b);
                    if top < LN_ZERO {
                        return Err(Contradiction);
                    }
                    let lse = top + ((a - top).exp() + (b - top).exp()).ln();
                    self.pi_tilde[i] = [(rho * (a - lse)).exp(), (rho * (b - lse)).exp()];
                }
            }
            KSatStarMode::Focusing { gamma, y } => {
                for i in 0..self.instance.n {
                    // star-cavity field: no π̃, clause messages only
                    let g_plus = self.prod[i][1].log();
                    let g_minus = self.prod[i][0].log();
                    if g_plus.max(g_minus) < LN_ZERO {
                        return Err(Contradiction);
                    }
                    let h = clamp_field(0.5 * (g_plus - g_minus));
                    let m_star = focusing_field(h, gamma, y).tanh();
                    self.pi_tilde[i] = [1.0 + m_star, 1.0 - m_star];
                }
            }
        }
        Ok(())
    }

    pub fn iterate(&mut self, max_sweeps: usize, tol: f64) -> Result<KSatSweepReport, Contradiction> {
        let mut sweeps = 0;
        let mut max_change = f64::INFINITY;
        while sweeps < max_sweeps {
            max_change = self.sweep()?;
            sweeps += 1;
            if max_change < tol {
                return Ok(KSatSweepReport { sweeps, max_change, converged: true });
            }
        }
        Ok(KSatSweepReport { sweeps, max_change, converged: false })
    }

    /// Full single-site magnetizations ⟨σ_i⟩.
    pub fn magnetizations(&self) -> Result<Vec<f64>, Contradiction> {
        let mut m = Vec::with_capacity(self.instance.n);
        for i in 0..self.instance.n {
            let a = self.pi_tilde[i][0].ln() + self.prod[i][1].log();
            let b = self.pi_tilde[i][1].ln() + self.prod[i][0].log();
            if a.max(b) < LN_ZERO {
                return Err(Contradiction);
            }
            m.push((0.5 * (a - b)).tanh());
        }
        Ok(m)
    }

    /// sign(m) with sign(0) = +1.
    pub fn clamped_assignment(&self) -> Result<Vec<i8>, Contradiction> {
        Ok(self
            .magnetizations()?
            .iter()
            .map(|&m| if m >= 0.0 { 1 } else { -1 })
            .collect())
    }
}

/// One synchronous message-passing sweep; returns the largest η change.
pub fn ksat_sweep(graph: &mut KSatGraph) -> Result<f64, Contradiction> {
    graph.sweep()
}
