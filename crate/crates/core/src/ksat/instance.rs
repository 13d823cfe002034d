//! K-SAT instances: DIMACS parsing/serialization, random generation, and
//! the violated-clause count.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::KSatError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    /// variable indices, 0-based, no repeats
    pub vars: Vec<usize>,
    /// +1 for a plain literal, −1 for a negated one
    pub j: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSatInstance {
    pub n: usize,
    pub clauses: Vec<Clause>,
}

impl KSatInstance {
    pub fn alpha(&self) -> f64 {
        self.clauses.len() as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<(), KSatError> {
        for (mu, c) in self.clauses.iter().enumerate() {
            if c.vars.is_empty() {
                return Err(KSatError::BadInstance(format!("clause {mu} is empty")));
            }
            if c.vars.len() != c.j.len() {
                return Err(KSatError::BadInstance(format!("clause {mu} has mismatched couplings")));
            }
            let mut seen = c.vars.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != c.vars.len() {
                return Err(KSatError::BadInstance(format!("clause {mu} repeats a variable")));
            }
            if c.vars.iter().any(|&v| v >= self.n) {
                return Err(KSatError::BadInstance(format!("clause {mu} indexes out of range")));
            }
        }
        Ok(())
    }
}

/// Number of violated clauses: Σ_μ Π_{i∈∂μ} (1 − J_{μi}σ_i)/2.
pub fn count_violated(instance: &KSatInstance, assignment: &[i8]) -> Result<usize, KSatError> {
    if assignment.len() != instance.n {
        return Err(KSatError::BadInstance(format!(
            "assignment length {} for {} variables",
            assignment.len(),
            instance.n
        )));
    }
    Ok(instance
        .clauses
        .iter()
        .filter(|c| c.vars.iter().zip(&c.j).all(|(&v, &j)| assignment[v] != j))
        .count())
}

/// Uniform random K-SAT: round(αN) clauses over uniform K-subsets with
/// uniform ±1 couplings.
pub fn generate_ksat(n: usize, alpha: f64, k: usize, seed: u64) -> Result<KSatInstance, KSatError> {
    if k == 0 || k > n {
        return Err(KSatError::BadInstance(format!("clause width {k} for {n} variables")));
    }
    if !(alpha > 0.0) {
        return Err(KSatError::BadInstance(format!("non-positive clause density {alpha}")));
    }
    let m = (alpha * n as f64).round() as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let (subset, _) = pool.partial_shuffle(&mut rng, k);
        let vars = subset.to_vec();
        let j = (0..k).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        clauses.push(Clause { vars, j });
    }
    Ok(KSatInstance { n, clauses })
}

/// DIMACS CNF.
pub fn parse_cnf(text: &str) -> Result<KSatInstance, KSatError> {
    let mut n = None;
    let mut declared_m = 0usize;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(KSatError::BadCnf(format!("bad problem line: {line}")));
            }
            n = Some(
                fields[2]
                    .parse::<usize>()
                    .map_err(|_| KSatError::BadCnf(format!("bad variable count: {line}")))?,
            );
            declared_m = fields[3]
                .parse()
                .map_err(|_| KSatError::BadCnf(format!("bad clause count: {line}")))?;
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| KSatError::BadCnf(format!("bad literal: {tok}")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(KSatError::BadCnf("empty clause".into()));
                }
                let n = n.ok_or_else(|| KSatError::BadCnf("clause before problem line".into()))?;
                let mut vars = Vec::with_capacity(current.len());
                let mut j = Vec::with_capacity(current.len());
                for &l in &current {
                    let v = l.unsigned_abs() as usize;
                    if v == 0 || v > n {
                        return Err(KSatError::BadCnf(format!("literal {l} out of range")));
                    }
                    vars.push(v - 1);
                    j.push(if l > 0 { 1 } else { -1 });
                }
                clauses.push(Clause { vars, j });
                current.clear();
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(KSatError::BadCnf("unterminated clause".into()));
    }
    let n = n.ok_or_else(|| KSatError::BadCnf("missing problem line".into()))?;
    if declared_m != clauses.len() {
        return Err(KSatError::BadCnf(format!(
            "declared {declared_m} clauses, found {}",
            clauses.len()
        )));
    }
    let instance = KSatInstance { n, clauses };
    instance.validate()?;
    Ok(instance)
}

pub fn serialize_cnf(instance: &KSatInstance) -> String {
    let mut out = format!("p cnf {} {}\n", instance.n, instance.clauses.len());
    for c in &instance.clauses {
        for (&v, &j) in c.vars.iter().zip(&c.j) {
            let lit = (v as i64 + 1) * j as i64;
            out.push_str(&lit.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}
