//! K-SAT solvers built on cavity message passing: plain BP with guided
//! decimation, reinforced BP, and the replica-coupled (focusing) variant.

pub mod graph;
pub mod instance;


use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{solution_hash, RunRecord, RunStatus, TracePoint};
pub use graph::{ksat_sweep, Contradiction, KSatGraph, KSatStarMode, KSatSweepReport};
pub use instance::{count_violated, generate_ksat, parse_cnf, serialize_cnf, Clause, KSatInstance};

#[derive(Debug, Error)]
pub enum KSatError {
    #[error("invalid instance: {0}")]
    BadInstance(String),
    #[error("invalid CNF: {0}")]
    BadCnf(String),
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum KSatMode {
    /// Plain BP: converge once, clamp.
    Bp,
    /// BP-guided decimation: converge, permanently fix the given fraction
    /// of the still-free variables (the most polarized ones, ties by
    /// index), simplify, repeat.
    BpDecimation { fraction: f64 },
    /// Reinforced BP with ρ ramped linearly to 1.
    Reinforced { rho_step: f64 },
    /// Replica-coupled BP with a γ ramp at fixed y.
    Focusing { y: f64, gamma_start: f64, gamma_step: f64, gamma_stop: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KSatProtocol {
    pub mode: KSatMode,
    pub damping: f64,
    pub sweeps_per_step: usize,
    pub tol: f64,
    pub init_noise: f64,
}

impl KSatProtocol {
    pub fn defaults() -> KSatProtocol {
        KSatProtocol {
            mode: KSatMode::Bp,
            damping: 0.5,
            sweeps_per_step: 2000,
            tol: 1e-5,
            init_noise: 1e-2,
        }
    }

    pub fn focusing(y: f64, gamma_start: f64, gamma_step: f64, gamma_stop: f64) -> KSatProtocol {
        KSatProtocol {
            mode: KSatMode::Focusing { y, gamma_start, gamma_step, gamma_stop },
            ..KSatProtocol::defaults()
        }
    }

    pub fn validate(&self) -> Result<(), KSatError> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(KSatError::InvalidProtocol("damping must be in [0,1)".into()));
        }
        if self.sweeps_per_step == 0 || !(self.tol > 0.0) {
            return Err(KSatError::InvalidProtocol("need sweeps_per_step ≥ 1 and tol > 0".into()));
        }
        if !(0.0..0.5).contains(&self.init_noise) {
            return Err(KSatError::InvalidProtocol("init_noise must be in [0, 0.5)".into()));
        }
        match self.mode {
            KSatMode::Bp => Ok(()),
            KSatMode::BpDecimation { fraction } => {
                if fraction > 0.0 && fraction <= 1.0 {
                    Ok(())
                } else {
                    Err(KSatError::InvalidProtocol("fraction must be in (0,1]".into()))
                }
            }
            KSatMode::Reinforced { rho_step } => {
                if rho_step > 0.0 && rho_step <= 1.0 {
                    Ok(())
                } else {
                    Err(KSatError::InvalidProtocol("rho_step must be in (0,1]".into()))
                }
            }
            KSatMode::Focusing { y, gamma_start, gamma_step, gamma_stop } => {
                if y >= 1.0 && gamma_start >= 0.0 && gamma_step > 0.0 && gamma_stop >= gamma_start
                {
                    Ok(())
                } else {
                    Err(KSatError::InvalidProtocol(
                        "need y ≥ 1, 0 ≤ gamma_start ≤ gamma_stop, gamma_step > 0".into(),
                    ))
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct KSatOutcome {
    pub record: RunRecord,
    /// Present iff the record is Solved.
    pub assignment: Option<Vec<i8>>,
}

/// Runs the selected protocol on the instance. Ramp modes converge the
/// messages at each parameter value, clamp σ_i = sign(m_i), and stop at
/// the first assignment with no violated clauses.
pub fn solve_ksat(
    instance: &KSatInstance,
    protocol: &KSatProtocol,
    seed: u64,
) -> Result<KSatOutcome, KSatError> {
    protocol.validate()?;
    instance.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut trace: Vec<TracePoint> = Vec::new();
    let mut status = RunStatus::BpFailure;
    let mut any_converged = false;
    let mut sweeps_total: u64 = 0;
    let mut assignment: Option<Vec<i8>> = None;

    match protocol.mode {
        KSatMode::BpDecimation { fraction } => {
            let outcome = decimate(instance, protocol, fraction, &mut rng)?;
            trace = outcome.trace;
            status = outcome.status;
            any_converged = outcome.any_converged;
            sweeps_total = outcome.sweeps;
            assignment = outcome.assignment;
        }
        _ => {
            let steps: Vec<KSatStarMode> = match protocol.mode {
                KSatMode::Bp => vec![KSatStarMode::Plain],
                KSatMode::Reinforced { rho_step } => {
                    rho_ramp(rho_step).into_iter().map(|rho| KSatStarMode::Reinforced { rho }).collect()
                }
                KSatMode::Focusing { y, gamma_start, gamma_step, gamma_stop } => {
                    let mut v = Vec::new();
                    let mut g = gamma_start;
                    while g <= gamma_stop + 1e-12 {
                        v.push(KSatStarMode::Focusing { gamma: g, y });
                        g += gamma_step;
                    }
                    v
                }
                KSatMode::BpDecimation { .. } => unreachable!(),
            };
            let mut graph = KSatGraph::new(instance, protocol.damping, protocol.init_noise, &mut rng);
            'steps: for mode in steps {
                graph.set_mode(mode);
                let mut tp = TracePoint::new();
                match mode {
                    KSatStarMode::Plain => {}
                    KSatStarMode::Reinforced { rho } => {
                        tp.insert("rho".into(), rho);
                    }
                    KSatStarMode::Focusing { gamma, y } => {
                        tp.insert("gamma".into(), gamma);
                        tp.insert("y".into(), y);
                    }
                }
                let report = match graph.iterate(protocol.sweeps_per_step, protocol.tol) {
                    Ok(r) => r,
                    Err(Contradiction) => {
                        status = RunStatus::Contradiction;
                        break 'steps;
                    }
                };
                sweeps_total += report.sweeps as u64;
                any_converged |= report.converged;
                let signs = match graph.clamped_assignment() {
                    Ok(s) => s,
                    Err(Contradiction) => {
                        status = RunStatus::Contradiction;
                        break 'steps;
                    }
                };
                let violated = count_violated(instance, &signs)?;
                let m = graph.magnetizations().expect("checked above");
                let q = m.iter().map(|x| x * x).sum::<f64>() / m.len() as f64;
                tp.insert("sweeps".into(), report.sweeps as f64);
                tp.insert("converged".into(), if report.converged { 1.0 } else { 0.0 });
                tp.insert("violated".into(), violated as f64);
                tp.insert("q".into(), q);
                trace.push(tp);
                if violated == 0 {
                    status = RunStatus::Solved;
                    assignment = Some(signs);
                    break 'steps;
                }
            }
            if status == RunStatus::BpFailure && any_converged {
                status = RunStatus::Timeout;
            }
        }
    }
    let _ = any_converged;

    Ok(KSatOutcome {
        record: RunRecord {
            algorithm: "ksat".into(),
            params: serde_json::json!({
                "n": instance.n,
                "m": instance.clauses.len(),
                "alpha": instance.alpha(),
                "protocol": serde_json::to_value(protocol).unwrap(),
            }),
            seed,
            status,
            iterations: sweeps_total,
            solution_hash: assignment.as_deref().map(solution_hash),
            trace,
        },
        assignment,
    })
}

struct DecimationOutcome {
    trace: Vec<TracePoint>,
    status: RunStatus,
    any_converged: bool,
    sweeps: u64,
    assignment: Option<Vec<i8>>,
}

fn decimate(
    instance: &KSatInstance,
    protocol: &KSatProtocol,
    fraction: f64,
    rng: &mut ChaCha12Rng,
) -> Result<DecimationOutcome, KSatError> {
    let mut fixed: Vec<Option<i8>> = vec![None; instance.n];
    let mut trace = Vec::new();
    let mut any_converged = false;
    let mut sweeps: u64 = 0;

    loop {
        let reduced = match reduce(instance, &fixed) {
            Ok(r) => r,
            Err(Contradiction) => {
                return Ok(DecimationOutcome {
                    trace,
                    status: RunStatus::Contradiction,
                    any_converged,
                    sweeps,
                    assignment: None,
                });
            }
        };
        if reduced.instance.clauses.is_empty() {
            // remaining variables are unconstrained
            for f in fixed.iter_mut() {
                f.get_or_insert(1);
            }
            break;
        }
        let mut graph = KSatGraph::new(&reduced.instance, protocol.damping, protocol.init_noise, rng);
        let step = graph
            .iterate(protocol.sweeps_per_step, protocol.tol)
            .and_then(|report| graph.magnetizations().map(|m| (report, m)));
        let (report, m) = match step {
            Ok(v) => v,
            Err(Contradiction) => {
                return Ok(DecimationOutcome {
                    trace,
                    status: RunStatus::Contradiction,
                    any_converged,
                    sweeps,
                    assignment: None,
                });
            }
        };
        sweeps += report.sweeps as u64;
        any_converged |= report.converged;

        // fix the most polarized fraction of the still-free variables
        let n_free = reduced.instance.n;
        let to_fix = (((fraction * n_free as f64).round() as usize).max(1)).min(n_free);
        let mut order: Vec<usize> = (0..n_free).collect();
        order.sort_by(|&a, &b| {
            m[b].abs()
                .partial_cmp(&m[a].abs())
                .unwrap()
                .then(reduced.to_old[a].cmp(&reduced.to_old[b]))
        });
        for &local in order.iter().take(to_fix) {
            fixed[reduced.to_old[local]] = Some(if m[local] >= 0.0 { 1 } else { -1 });
        }

        let mut tp = TracePoint::new();
        tp.insert("free".into(), n_free as f64);
        tp.insert("sweeps".into(), report.sweeps as f64);
        tp.insert("converged".into(), if report.converged { 1.0 } else { 0.0 });
        trace.push(tp);
    }

    let signs: Vec<i8> = fixed.iter().map(|f| f.unwrap()).collect();
    let violated = count_violated(instance, &signs)?;
    let status = if violated == 0 {
        RunStatus::Solved
    } else if any_converged {
        RunStatus::Timeout
    } else {
        RunStatus::BpFailure
    };
    Ok(DecimationOutcome {
        trace,
        status,
        any_converged,
        sweeps,
        assignment: if status == RunStatus::Solved { Some(signs) } else { None },
    })
}

struct Reduced {
    instance: KSatInstance,
    /// local variable index → index in the original instance
    to_old: Vec<usize>,
}

/// Drops clauses satisfied by fixed variables and strips fixed literals
/// from the rest; a clause with all literals falsified is a contradiction.
fn reduce(instance: &KSatInstance, fixed: &[Option<i8>]) -> Result<Reduced, Contradiction> {
    let mut to_new: Vec<Option<usize>> = vec![None; instance.n];
    let mut to_old = Vec::new();
    let mut clauses = Vec::new();
    for c in &instance.clauses {
        let mut vars = Vec::new();
        let mut j = Vec::new();
        let mut satisfied = false;
        for (&v, &jj) in c.vars.iter().zip(&c.j) {
            match fixed[v] {
                Some(s) if s == jj => {
                    satisfied = true;
                    break;
                }
                Some(_) => {}
                None => {
                    vars.push(v);
                    j.push(jj);
                }
            }
        }
        if satisfied {
            continue;
        }
        if vars.is_empty() {
            return Err(Contradiction);
        }
        let vars = vars
            .into_iter()
            .map(|v| {
                *to_new[v].get_or_insert_with(|| {
                    to_old.push(v);
                    to_old.len() - 1
                })
            })
            .collect();
        clauses.push(Clause { vars, j });
    }
    Ok(Reduced { instance: KSatInstance { n: to_old.len(), clauses }, to_old })
}

fn rho_ramp(step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut rho = step;
    while rho < 1.0 - 1e-12 {
        v.push(rho);
        rho += step;
    }
    v.push(1.0);
    v
}
