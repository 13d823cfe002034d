//! Belief propagation on binary-weight networks with a self-interaction
//! message coupling each replica to a traced reference configuration
//! ("focusing"), plus the classic reinforcement variant and plain BP.

pub mod factor;
pub mod graph;
pub mod special;


use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{solution_hash, RunRecord, RunStatus, TracePoint};
use crate::model::{error_count, PatternSet, WeightConfig};
use graph::{focusing_field, CavityGraph};
use special::atanh_clamped;

#[derive(Debug, Error)]
pub enum FbpError {
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Extra message a variable receives from the traced reference:
/// tanh((y−1)·atanh(m·tanhγ))·tanhγ. Real-valued y ≥ 1 is allowed.
pub fn focusing_message(m: f64, gamma: f64, y: f64) -> f64 {
    focusing_field(atanh_clamped(m), gamma, y).tanh()
}

/// Reinforcement self-message tanh(ρ·atanh(m)).
pub fn reinforcement_message(m: f64, rho: f64) -> f64 {
    if rho == 1.0 {
        return m;
    }
    (rho * atanh_clamped(m)).tanh()
}

/// Joint ramp (γ, y) as functions of ρ ∈ [0,1): γ = atanh(ρ^x),
/// y = 1 + ρ^{1−2x}/(1−ρ). x = 0 reproduces the reinforcement family
/// y = (1−ρ)⁻¹ with γ saturated.
pub fn ramp_map(rho: f64, x: f64) -> (f64, f64) {
    let gamma = libm::atanh(rho.powf(x));
    let y = 1.0 + rho.powf(1.0 - 2.0 * x) / (1.0 - rho);
    (gamma, y)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum FbpMode {
    /// Plain BP: converge once, clamp.
    Bp,
    /// Reinforced BP: ρ ramped linearly to 1.
    Reinforced { rho_step: f64 },
    /// γ-ramp at fixed y.
    Focusing { y: f64, gamma_start: f64, gamma_step: f64, gamma_stop: f64 },
    /// Joint (γ, y) ramp parameterized by ρ with exponent x.
    Joint { x: f64, rho_step: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FbpProtocol {
    pub mode: FbpMode,
    pub damping: f64,
    pub sweeps_per_step: usize,
    pub tol: f64,
    pub init_noise: f64,
}

impl FbpProtocol {
    pub fn focusing(y: f64, gamma_start: f64, gamma_step: f64, gamma_stop: f64) -> FbpProtocol {
        FbpProtocol {
            mode: FbpMode::Focusing { y, gamma_start, gamma_step, gamma_stop },
            ..FbpProtocol::defaults()
        }
    }

    pub fn defaults() -> FbpProtocol {
        FbpProtocol {
            mode: FbpMode::Bp,
            damping: 0.0,
            sweeps_per_step: 2000,
            tol: 1e-5,
            init_noise: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<(), FbpError> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(FbpError::InvalidProtocol("damping must be in [0,1)".into()));
        }
        if self.sweeps_per_step == 0 || !(self.tol > 0.0) {
            return Err(FbpError::InvalidProtocol("need sweeps_per_step ≥ 1 and tol > 0".into()));
        }
        match self.mode {
            FbpMode::Bp => Ok(()),
            FbpMode::Reinforced { rho_step } | FbpMode::Joint { rho_step, .. } => {
                if rho_step > 0.0 && rho_step <= 1.0 {
                    Ok(())
                } else {
                    Err(FbpError::InvalidProtocol("rho_step must be in (0,1]".into()))
                }
            }
            FbpMode::Focusing { y, gamma_start, gamma_step, gamma_stop } => {
                if y >= 1.0 && gamma_start >= 0.0 && gamma_step > 0.0 && gamma_stop >= gamma_start
                {
                    Ok(())
                } else {
                    Err(FbpError::InvalidProtocol(
                        "need y ≥ 1, 0 ≤ gamma_start ≤ gamma_stop, gamma_step > 0".into(),
                    ))
                }
            }
        }
    }
}

/// Ramps the protocol parameter, converging the messages at each step,
/// clamping W_j = sign(m_j) and checking the clamped configuration against
/// the energy; stops at the first zero-energy assignment.
pub fn solve_fbp(patterns: &PatternSet, protocol: &FbpProtocol, seed: u64) -> Result<RunRecord, FbpError> {
    protocol.validate()?;
    let topology = patterns.topology;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut graph = CavityGraph::new(patterns, protocol.damping, protocol.init_noise, &mut rng);

    enum Step {
        Plain,
        Rho(f64),
        Gamma(f64, f64),
        Joint(f64, f64, f64),
    }
    let steps: Vec<Step> = match protocol.mode {
        FbpMode::Bp => vec![Step::Plain],
        FbpMode::Reinforced { rho_step } => ramp(rho_step).into_iter().map(Step::Rho).collect(),
        FbpMode::Focusing { y, gamma_start, gamma_step, gamma_stop } => {
            let mut v = Vec::new();
            let mut g = gamma_start;
            while g <= gamma_stop + 1e-12 {
                v.push(Step::Gamma(g, y));
                g += gamma_step;
            }
            v
        }
        FbpMode::Joint { x, rho_step } => ramp(rho_step)
            .into_iter()
            .map(|rho| {
                let (g, y) = ramp_map(rho, x);
                Step::Joint(rho, g, y)
            })
            .collect(),
    };

    let mut trace: Vec<TracePoint> = Vec::new();
    let mut status = RunStatus::BpFailure;
    let mut any_converged = false;
    let mut sweeps_total: u64 = 0;
    let mut solution: Option<Vec<i8>> = None;

    for step in &steps {
        let mut tp = TracePoint::new();
        match *step {
            Step::Plain => graph.set_plain(),
            Step::Rho(rho) => {
                graph.set_reinforced(rho);
                tp.insert("rho".into(), rho);
            }
            Step::Gamma(g, y) => {
                graph.set_focusing(g, y);
                tp.insert("gamma".into(), g);
                tp.insert("y".into(), y);
            }
            Step::Joint(rho, g, y) => {
                graph.set_focusing(g, y);
                tp.insert("rho".into(), rho);
                tp.insert("gamma".into(), if g.is_infinite() { f64::MAX } else { g });
                tp.insert("y".into(), y);
            }
        }
        let report = graph.iterate(protocol.sweeps_per_step, protocol.tol);
        sweeps_total += report.sweeps as u64;
        any_converged |= report.converged;

        let signs = graph.clamped_weights();
        let w = WeightConfig::from_signs(topology, &signs)?;
        let errors = error_count(&w, patterns);
        let obs = graph.observables();
        tp.insert("sweeps".into(), report.sweeps as f64);
        tp.insert("converged".into(), if report.converged { 1.0 } else { 0.0 });
        tp.insert("error_count".into(), errors as f64);
        tp.insert("q".into(), obs.q);
        if let (Some(s), Some(d), Some(le)) = (obs.s, obs.distance, obs.local_entropy) {
            tp.insert("overlap_s".into(), s);
            tp.insert("distance".into(), d);
            tp.insert("local_entropy".into(), le);
        }
        trace.push(tp);

        if errors == 0 {
            status = RunStatus::Solved;
            solution = Some(signs);
            break;
        }
    }
    if status != RunStatus::Solved && any_converged {
        status = RunStatus::Timeout;
    }

    Ok(RunRecord {
        algorithm: "fbp".into(),
        params: serde_json::json!({
            "n": topology.n(),
            "k": topology.units(),
            "kind": topology.kind().as_str(),
            "alpha": patterns.alpha,
            "pattern_seed": patterns.seed,
            "protocol": serde_json::to_value(protocol).unwrap(),
        }),
        seed,
        status,
        iterations: sweeps_total,
        solution_hash: solution.as_deref().map(solution_hash),
        trace,
    })
}

fn ramp(step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut rho = step;
    while rho < 1.0 - 1e-12 {
        v.push(rho);
        rho += step;
    }
    v.push(1.0 - 1e-9);
    v
}
