//! Messages out of a perceptron-like factor node: the factor enforces
//! τ = sign(Σ_i ξ_i σ_i) with sign(0) = +1, weighted by the incoming
//! output message m_{τ→μ} and the incoming cavity magnetizations.

use super::special::{atanh_clamped, stable_atanh_erf};

/// Distribution of Σ c_i over independent ±1 contributions; `p_plus[i]`
/// is P(c_i = +1). Returned vector is indexed by the number of +1's
/// (sum value = 2s − n).
fn sum_distribution(p_plus: &[f64]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &p in p_plus {
        let mut next = vec![0.0; dist.len() + 1];
        for (s, &w) in dist.iter().enumerate() {
            next[s] += w * (1.0 - p);
            next[s + 1] += w * p;
        }
        dist = next;
    }
    dist
}

#[inline]
fn expected_sign(dist: &[f64]) -> f64 {
    let n = dist.len() - 1;
    dist.iter()
        .enumerate()
        .map(|(s, &w)| if 2 * s as i64 - n as i64 >= 0 { w } else { -w })
        .sum()
}

/// Exact factor update by partial convolution, O(n³) in the fan-in.
/// Inputs: cavity magnetizations `ms`, couplings `xis` (±1), output
/// message `m_tau`. Returns (m_{μ→τ}, per-input m_{μ→j}).
pub fn exact_factor(ms: &[f64], xis: &[i64], m_tau: f64) -> (f64, Vec<f64>) {
    let n = ms.len();
    debug_assert_eq!(xis.len(), n);
    let p_plus: Vec<f64> = ms
        .iter()
        .zip(xis)
        .map(|(&m, &xi)| (1.0 + xi as f64 * m) / 2.0)
        .collect();
    let m_out = expected_sign(&sum_distribution(&p_plus));

    let mut to_inputs = vec![0.0; n];
    for j in 0..n {
        let cav: Vec<f64> = p_plus
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &p)| p)
            .collect();
        let dist = sum_distribution(&cav);
        // f(σ_j) = Σ_{S'} P[S']·(1 + sign(S' + ξ_j σ_j)·m_τ)/2
        let mut f = [0.0f64; 2]; // [σ=+1, σ=−1]
        for (s, &w) in dist.iter().enumerate() {
            let s_cav = 2 * s as i64 - (n as i64 - 1);
            for (slot, sigma) in [(0usize, 1i64), (1, -1)] {
                let sign = if s_cav + xis[j] * sigma >= 0 { 1.0 } else { -1.0 };
                f[slot] += w * (1.0 + sign * m_tau) / 2.0;
            }
        }
        let den = (f[0] + f[1]).max(1e-300);
        to_inputs[j] = ((f[0] - f[1]) / den).clamp(-1.0, 1.0);
    }
    (m_out, to_inputs)
}

/// Central-limit factor update, O(n). Returns the output message as a
/// field (computed through erfc so it stays exact when saturated) and the
/// per-input magnetizations.
pub fn gaussian_factor(ms: &[f64], xis: &[i64], m_tau: f64) -> (f64, Vec<f64>) {
    let n = ms.len();
    let mut a = 0.0;
    let mut b = 0.0;
    for (&m, &xi) in ms.iter().zip(xis) {
        a += xi as f64 * m;
        b += 1.0 - m * m;
    }
    let h_out = stable_atanh_erf(a / (2.0 * b.max(1e-15)).sqrt());

    let mut to_inputs = vec![0.0; n];
    for j in 0..n {
        let xi = xis[j] as f64;
        let a_cav = a - xi * ms[j];
        let b_cav = (b - (1.0 - ms[j] * ms[j])).max(1e-15);
        let s = (2.0 * b_cav).sqrt();
        // g(σ) = erf((a_cav + σξ_j)/s); num = g(+1) − g(−1) = ξ_j·d with
        // d = erf((a_cav+1)/s) − erf((a_cav−1)/s) ≥ 0.
        let up = (a_cav + 1.0) / s;
        let um = (a_cav - 1.0) / s;
        let d = erf_diff(um, up);
        let gsum = libm::erf(up) + libm::erf(um);
        let den = 2.0 + m_tau * gsum;
        to_inputs[j] = (m_tau * xi * d / den.max(1e-300)).clamp(-1.0, 1.0);
    }
    (h_out, to_inputs)
}

/// erf(hi) − erf(lo) for lo ≤ hi, avoiding cancellation in the tails.
fn erf_diff(lo: f64, hi: f64) -> f64 {
    if lo > 4.0 {
        libm::erfc(lo) - libm::erfc(hi)
    } else if hi < -4.0 {
        libm::erfc(-hi) - libm::erfc(-lo)
    } else {
        libm::erf(hi) - libm::erf(lo)
    }
}

/// Exact output message in field representation (used for the Bethe
/// factor terms and small fan-ins).
pub fn exact_output_field(ms: &[f64], xis: &[i64]) -> f64 {
    let p_plus: Vec<f64> = ms
        .iter()
        .zip(xis)
        .map(|(&m, &xi)| (1.0 + xi as f64 * m) / 2.0)
        .collect();
    atanh_clamped(expected_sign(&sum_distribution(&p_plus)))
}
