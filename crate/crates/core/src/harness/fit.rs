//! Scaling fits in logarithmic scale and rank statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HarnessError, RunRecord, RunStatus};

/// y = a·N^b, least squares on ln y = ln a + b·ln N.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    /// RMS residual in log space.
    pub residual: f64,
}

/// y = a·N^b·exp(c·N^d): linear in (ln a, b, c) at fixed d, with the
/// remaining one-dimensional profile minimized over d.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StretchedFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub residual: f64,
}

fn check_points(points: &[(f64, f64)], needed: usize) -> Result<(), HarnessError> {
    if points.len() < needed {
        return Err(HarnessError::InsufficientData(format!(
            "{} points, need at least {needed}",
            points.len()
        )));
    }
    if points.iter().any(|&(n, y)| !(n > 0.0) || !(y > 0.0)) {
        return Err(HarnessError::InsufficientData("points must be positive".into()));
    }
    Ok(())
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit, HarnessError> {
    check_points(points, 2)?;
    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, y) in points {
        let (x, y) = (n.ln(), y.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(HarnessError::InsufficientData("degenerate N values".into()));
    }
    let b = (m * sxy - sx * sy) / denom;
    let ln_a = (sy - b * sx) / m;
    let residual = (points
        .iter()
        .map(|&(n, y)| (y.ln() - ln_a - b * n.ln()).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(PowerLawFit { a: ln_a.exp(), b, residual })
}

/// Solves the 3×3 normal equations A·x = b by Gaussian elimination with
/// partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut v = b[col];
        for k in col + 1..3 {
            v -= a[col][k] * x[k];
        }
        x[col] = v / a[col][col];
    }
    Some(x)
}

/// Mean squared log-residual and coefficients for fixed exponent d.
fn stretched_at_d(points: &[(f64, f64)], d: f64) -> Option<([f64; 3], f64)> {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(n, y) in points {
        let basis = [1.0, n.ln(), n.powf(d)];
        let target = y.ln();
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += basis[i] * basis[j];
            }
            atb[i] += basis[i] * target;
        }
    }
    let coef = solve3(ata, atb)?;
    let mse = points
        .iter()
        .map(|&(n, y)| (y.ln() - coef[0] - coef[1] * n.ln() - coef[2] * n.powf(d)).powi(2))
        .sum::<f64>()
        / points.len() as f64;
    Some((coef, mse))
}

pub fn fit_stretched(points: &[(f64, f64)]) -> Result<StretchedFit, HarnessError> {
    check_points(points, 4)?;
    // profile over d: coarse log-spaced scan, then golden-section refine
    let (d_lo, d_hi) = (0.02f64, 3.0f64);
    let mut best = (f64::INFINITY, d_lo);
    for i in 0..=400 {
        let d = d_lo * (d_hi / d_lo).powf(i as f64 / 400.0);
        if let Some((_, mse)) = stretched_at_d(points, d) {
            if mse < best.0 {
                best = (mse, d);
            }
        }
    }
    let ratio = (d_hi / d_lo).powf(1.0 / 400.0);
    let (mut lo, mut hi) = (best.1 / ratio, best.1 * ratio);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - (hi - lo) * phi;
        let m2 = lo + (hi - lo) * phi;
        let f1 = stretched_at_d(points, m1).map_or(f64::INFINITY, |(_, e)| e);
        let f2 = stretched_at_d(points, m2).map_or(f64::INFINITY, |(_, e)| e);
        if f1 <= f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let d = 0.5 * (lo + hi);
    let (coef, mse) = stretched_at_d(points, d)
        .ok_or_else(|| HarnessError::InsufficientData("degenerate stretched fit".into()))?;
    Ok(StretchedFit { a: coef[0].exp(), b: coef[1], c: coef[2], d, residual: mse.sqrt() })
}

/// Per-N summary of solved records: geometric mean of iterations and the
/// standard deviation of ln(iterations) (averages taken in log scale).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalePoint {
    pub n: f64,
    pub solved: usize,
    pub total: usize,
    pub geo_mean_iterations: f64,
    pub log_std: f64,
}

pub fn scaling_points(records: &[RunRecord]) -> Result<Vec<ScalePoint>, HarnessError> {
    let mut groups: BTreeMap<u64, (usize, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let n = r.params["n"]
            .as_u64()
            .ok_or_else(|| HarnessError::InsufficientData("record without n parameter".into()))?;
        let entry = groups.entry(n).or_default();
        entry.0 += 1;
        if r.status == RunStatus::Solved {
            if r.iterations == 0 {
                return Err(HarnessError::InsufficientData("solved record with zero iterations".into()));
            }
            entry.1.push((r.iterations as f64).ln());
        }
    }
    Ok(groups
        .into_iter()
        .map(|(n, (total, logs))| {
            let solved = logs.len();
            let mean = logs.iter().sum::<f64>() / solved.max(1) as f64;
            let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / solved.max(1) as f64;
            ScalePoint {
                n: n as f64,
                solved,
                total,
                geo_mean_iterations: if solved > 0 { mean.exp() } else { f64::NAN },
                log_std: var.sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    PowerLaw,
    Stretched,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub points: Vec<ScalePoint>,
    pub power_law: Option<PowerLawFit>,
    pub stretched: Option<StretchedFit>,
}

/// Fits the per-N geometric means of solved iteration counts. Requires at
/// least three N values with at least three solved records each.
pub fn fit_scaling(records: &[RunRecord], model: FitModel) -> Result<FitReport, HarnessError> {
    let points = scaling_points(records)?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.solved >= 3)
        .map(|p| (p.n, p.geo_mean_iterations))
        .collect();
    if usable.len() < 3 {
        return Err(HarnessError::InsufficientData(format!(
            "{} N values with ≥ 3 solved records, need 3",
            usable.len()
        )));
    }
    Ok(FitReport {
        points,
        power_law: match model {
            FitModel::PowerLaw => Some(fit_power_law(&usable)?),
            FitModel::Stretched => None,
        },
        stretched: match model {
            FitModel::Stretched => Some(fit_stretched(&usable)?),
            FitModel::PowerLaw => None,
        },
    })
}

/// Average ranks with ties sharing their mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average-rank tie handling.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, HarnessError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(HarnessError::InsufficientData("need two equal-length series".into()));
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let m = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / m, ry.iter().sum::<f64>() / m);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..rx.len() {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx).powi(2);
        vy += (ry[i] - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(HarnessError::InsufficientData("constant series has no rank correlation".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}
