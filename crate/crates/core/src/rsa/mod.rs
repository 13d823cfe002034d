//! Simulated annealing on the replicated system: y coupled replicas sampled
//! from exp(−β Σ_a E(W^a) + Σ_j log 2cosh(γ T_j)), with annealing (β),
//! scoping (γ), and an optional biased move proposal that absorbs the
//! replica-interaction field into the index choice.

pub mod phi;
mod system;

pub use phi::{phi, phi_recursion, phi_series, PhiTable};
pub use system::{ClassPartition, ClassValues, ReplicaSystem};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{solution_hash, RunRecord, RunStatus, TracePoint};
use crate::model::PatternSet;

#[derive(Debug, Error)]
pub enum RsaError {
    #[error("phi arguments out of range: n={n}, q={q}, lambda={lambda}")]
    PhiDomain { n: usize, q: usize, lambda: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

/// log cosh(x), stable for large |x|.
#[inline]
pub fn logcosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// k_j = ½ log(cosh(γ + γ Σ_{b≠a} W_j^b) / cosh(−γ + γ Σ_{b≠a} W_j^b)),
/// where the sum over the other replicas is T_j − W_j^a.
pub fn interaction_field(t_j: i64, w_j: i64, gamma: f64) -> f64 {
    let s = (t_j - w_j) as f64;
    0.5 * (logcosh(gamma * (s + 1.0)) - logcosh(gamma * (s - 1.0)))
}

/// Acceptance rule of the biased sampler: min(1, e^{−βΔE}) · a_c with
/// a_c = 1 − δ_{n_c,q_c} (1 − e^{−2c})^{q_c} for c > 0, else 1.
pub fn accept_move<R: Rng>(
    delta_e: i64,
    beta: f64,
    c: f64,
    n_c: usize,
    q_c: usize,
    rng: &mut R,
) -> bool {
    let mut p = if delta_e <= 0 {
        1.0
    } else {
        (-beta * delta_e as f64).exp()
    };
    if c > 0.0 && n_c == q_c {
        p *= 1.0 - (1.0 - (-2.0 * c).exp()).powi(q_c as i32);
    }
    rng.gen::<f64>() < p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalMode {
    /// Uniform index choice; the interaction field enters the acceptance.
    Metropolis,
    /// Class-based index choice absorbing the field; residual rejection only.
    Biased,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SaSchedule {
    pub beta0: f64,
    /// β is multiplied by (1 + beta_f) every 1000y accepted moves.
    pub beta_f: f64,
    pub gamma0: f64,
    /// γ is multiplied by (1 + gamma_f) on the same schedule.
    pub gamma_f: f64,
}

impl SaSchedule {
    pub fn validate(&self) -> Result<(), RsaError> {
        if !(self.beta0 > 0.0) {
            return Err(RsaError::InvalidSchedule(format!(
                "beta0 must be positive, got {}",
                self.beta0
            )));
        }
        for (name, v) in [
            ("beta_f", self.beta_f),
            ("gamma0", self.gamma0),
            ("gamma_f", self.gamma_f),
        ] {
            if !(v >= 0.0) {
                return Err(RsaError::InvalidSchedule(format!(
                    "{} must be non-negative, got {}",
                    name, v
                )));
            }
        }
        Ok(())
    }
}

pub struct StepOutcome {
    pub accepted: bool,
    pub delta_e: i64,
}

/// One Monte Carlo chain over the replicated system at fixed (β, γ) until
/// the parameters are changed through `set_beta_gamma`.
pub struct SaSampler<'a> {
    patterns: &'a PatternSet,
    pub system: ReplicaSystem,
    pub beta: f64,
    pub gamma: f64,
    mode: ProposalMode,
    values: ClassValues,
    partition: Option<ClassPartition>,
    rng: ChaCha12Rng,
}

impl<'a> SaSampler<'a> {
    pub fn new(
        patterns: &'a PatternSet,
        y: usize,
        beta: f64,
        gamma: f64,
        mode: ProposalMode,
        rng: ChaCha12Rng,
    ) -> SaSampler<'a> {
        let mut rng = rng;
        let system = ReplicaSystem::new_shared_random(patterns, y, &mut rng);
        let partition = match mode {
            ProposalMode::Biased => Some(ClassPartition::new(&system)),
            ProposalMode::Metropolis => None,
        };
        SaSampler {
            patterns,
            system,
            beta,
            gamma,
            mode,
            values: ClassValues::new(y, gamma),
            partition,
            rng,
        }
    }

    /// Starts from an explicit replica assignment (used by tests and by
    /// enumeration checks).
    pub fn from_replicas(
        patterns: &'a PatternSet,
        replicas: Vec<crate::model::WeightConfig>,
        beta: f64,
        gamma: f64,
        mode: ProposalMode,
        rng: ChaCha12Rng,
    ) -> SaSampler<'a> {
        let y = replicas.len();
        let n = patterns.topology.n();
        let caches: Vec<_> = replicas
            .iter()
            .map(|w| crate::model::PatternCache::new(w, patterns))
            .collect();
        let t: Vec<i64> = (0..n)
            .map(|j| replicas.iter().map(|w| w.get(j)).sum())
            .collect();
        let system = ReplicaSystem {
            y,
            replicas,
            caches,
            t,
        };
        let partition = match mode {
            ProposalMode::Biased => Some(ClassPartition::new(&system)),
            ProposalMode::Metropolis => None,
        };
        SaSampler {
            patterns,
            system,
            beta,
            gamma,
            mode,
            values: ClassValues::new(y, gamma),
            partition,
            rng,
        }
    }

    pub fn set_beta_gamma(&mut self, beta: f64, gamma: f64) {
        self.beta = beta;
        if gamma != self.gamma {
            self.gamma = gamma;
            self.values = ClassValues::new(self.system.y, gamma);
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }

    /// Draws a candidate move without evaluating or applying it. Returns the
    /// replica, the site, the site's class value c, and (n_c, q_c) of the
    /// positive side of its super-class (zeros when no residual rejection
    /// applies).
    pub fn propose(&mut self) -> Proposal {
        let y = self.system.y;
        let n = self.system.topology().n();
        let a = self.rng.gen_range(0..y);
        match self.mode {
            ProposalMode::Metropolis => {
                let j = self.rng.gen_range(0..n);
                let c = self.values.c_of_idx[ClassValues::idx_of(self.system.p_value(a, j), y)];
                Proposal {
                    a,
                    j,
                    c,
                    n_c: 0,
                    q_c: 0,
                }
            }
            ProposalMode::Biased => {
                // Super-class with probability q_c/N: the class of a uniform site.
                let j0 = self.rng.gen_range(0..n);
                let p0 = ClassValues::p_of(self.partition.as_ref().unwrap().class_of(a, j0), y);
                if p0 == 0 {
                    return Proposal {
                        a,
                        j: j0,
                        c: 0.0,
                        n_c: 0,
                        q_c: 0,
                    };
                }
                let idx_pos = ClassValues::idx_of(p0.abs(), y);
                let idx_neg = ClassValues::idx_of(-p0.abs(), y);
                let part = self.partition.as_ref().unwrap();
                let n_pos = part.class_len(a, idx_pos);
                let n_neg = part.class_len(a, idx_neg);
                let q = n_pos + n_neg;
                let p_hat = if n_pos == q {
                    1.0
                } else {
                    self.values.phi(idx_pos, n_pos, q)
                };
                let c_pos = self.values.c_of_idx[idx_pos];
                let part = self.partition.as_ref().unwrap();
                if self.rng.gen::<f64>() < p_hat {
                    let r = self.rng.gen_range(0..n_pos);
                    Proposal {
                        a,
                        j: part.class_member(a, idx_pos, r),
                        c: c_pos,
                        n_c: n_pos,
                        q_c: q,
                    }
                } else {
                    let r = self.rng.gen_range(0..n_neg);
                    // anti-aligned side: a_c = 1, no residual rejection
                    Proposal {
                        a,
                        j: part.class_member(a, idx_neg, r),
                        c: -c_pos,
                        n_c: 0,
                        q_c: 0,
                    }
                }
            }
        }
    }

    pub fn step(&mut self) -> StepOutcome {
        let prop = self.propose();
        let (k, i) = self.system.topology().split(prop.j);
        let delta_e = self.system.caches[prop.a].total_shift(
            self.patterns,
            &self.system.replicas[prop.a],
            k,
            i,
        );
        let accepted = match self.mode {
            ProposalMode::Metropolis => {
                let arg = -self.beta * delta_e as f64 - 2.0 * prop.c;
                arg >= 0.0 || self.rng.gen::<f64>() < arg.exp()
            }
            ProposalMode::Biased => {
                accept_move(delta_e, self.beta, prop.c, prop.n_c, prop.q_c, &mut self.rng)
            }
        };
        if accepted {
            let w_old = self.system.replicas[prop.a].get(prop.j);
            self.system.flip(self.patterns, prop.a, prop.j);
            if let Some(part) = self.partition.as_mut() {
                part.apply_flip(&self.system, prop.a, prop.j, w_old);
            }
        }
        StepOutcome { accepted, delta_e }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Proposal {
    pub a: usize,
    pub j: usize,
    pub c: f64,
    pub n_c: usize,
    pub q_c: usize,
}

/// Full annealing/scoping run; stops at zero energy, the non-improving
/// give-up threshold (1000·N·y), or `max_iters` attempts.
pub fn run_sa(
    patterns: &PatternSet,
    y: usize,
    schedule: &SaSchedule,
    mode: ProposalMode,
    seed: u64,
    max_iters: u64,
) -> Result<RunRecord, RsaError> {
    schedule.validate()?;
    let topology = patterns.topology;
    let n = topology.n();
    let rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sampler = SaSampler::new(patterns, y, schedule.beta0, schedule.gamma0, mode, rng);

    let give_up = 1000 * n as u64 * y as u64;
    let moves_per_step = 1000 * y as u64;
    let mut attempts: u64 = 0;
    let mut accepted_total: u64 = 0;
    let mut accepted_in_step: u64 = 0;
    let mut attempts_in_step: u64 = 0;
    let mut non_improving: u64 = 0;
    let mut trace: Vec<TracePoint> = Vec::new();

    let record_step = |sampler: &SaSampler,
                           attempts: u64,
                           attempts_in_step: u64,
                           accepted_in_step: u64,
                           trace: &mut Vec<TracePoint>| {
        let energies = sampler.system.energies();
        let min_e = *energies.iter().min().unwrap() as f64;
        let mean_e = energies.iter().sum::<i64>() as f64 / energies.len() as f64;
        let center = sampler.system.center_config();
        let center_e = crate::model::total_energy(&center, sampler.patterns) as f64;
        let mut tp = TracePoint::new();
        tp.insert("attempts".into(), attempts as f64);
        tp.insert("sweeps".into(), attempts as f64 / n as f64);
        tp.insert("beta".into(), sampler.beta);
        tp.insert("gamma".into(), sampler.gamma);
        tp.insert("min_energy".into(), min_e);
        tp.insert("mean_energy".into(), mean_e);
        tp.insert("center_energy".into(), center_e);
        tp.insert(
            "acceptance_rate".into(),
            if attempts_in_step > 0 {
                accepted_in_step as f64 / attempts_in_step as f64
            } else {
                0.0
            },
        );
        trace.push(tp);
    };

    let mut status = RunStatus::Timeout;
    if sampler.system.min_energy() == 0 {
        status = RunStatus::Solved;
    } else {
        loop {
            if attempts >= max_iters || non_improving >= give_up {
                break;
            }
            let out = sampler.step();
            attempts += 1;
            attempts_in_step += 1;
            if out.accepted {
                accepted_total += 1;
                accepted_in_step += 1;
                if out.delta_e < 0 {
                    non_improving = 0;
                } else {
                    non_improving += 1;
                }
            } else {
                non_improving += 1;
            }
            if sampler.system.min_energy() == 0 {
                status = RunStatus::Solved;
                break;
            }
            if accepted_in_step >= moves_per_step {
                record_step(
                    &sampler,
                    attempts,
                    attempts_in_step,
                    accepted_in_step,
                    &mut trace,
                );
                let beta = sampler.beta * (1.0 + schedule.beta_f);
                let gamma = sampler.gamma * (1.0 + schedule.gamma_f);
                sampler.set_beta_gamma(beta, gamma);
                accepted_in_step = 0;
                attempts_in_step = 0;
            }
        }
    }
    record_step(
        &sampler,
        attempts,
        attempts_in_step,
        accepted_in_step,
        &mut trace,
    );
    if let Some(last) = trace.last_mut() {
        last.insert("accepted_total".into(), accepted_total as f64);
    }

    let hash = if status == RunStatus::Solved {
        let energies = sampler.system.energies();
        let best = (0..y).min_by_key(|&a| energies[a]).unwrap();
        Some(solution_hash(&sampler.system.replicas[best].to_signs()))
    } else {
        None
    };

    Ok(RunRecord {
        algorithm: "rsa".into(),
        params: serde_json::json!({
            "n": n,
            "k": topology.units(),
            "kind": topology.kind().as_str(),
            "alpha": patterns.alpha,
            "pattern_seed": patterns.seed,
            "y": y,
            "beta0": schedule.beta0,
            "beta_f": schedule.beta_f,
            "gamma0": schedule.gamma0,
            "gamma_f": schedule.gamma_f,
            "mode": match mode { ProposalMode::Metropolis => "metropolis", ProposalMode::Biased => "biased" },
            "max_iters": max_iters,
        }),
        seed,
        status,
        iterations: attempts,
        solution_hash: hash,
        trace,
    })
}
