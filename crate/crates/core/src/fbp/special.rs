//! Numerics for message passing in field representation.

/// Field saturation bound; tanh(30) is 1 at working precision.
pub const H_MAX: f64 = 30.0;

#[inline]
pub fn clamp_field(h: f64) -> f64 {
    if h.is_nan() {
        0.0
    } else {
        h.clamp(-H_MAX, H_MAX)
    }
}

/// atanh with saturation instead of overflow at |m| → 1.
#[inline]
pub fn atanh_clamped(m: f64) -> f64 {
    clamp_field(libm::atanh(m))
}

/// ln(2 cosh x), overflow-free.
#[inline]
pub fn l2c(x: f64) -> f64 {
    x.abs() + (-2.0 * x.abs()).exp().ln_1p()
}

/// ln erfc(x): direct while erfc is representable (x ≤ 25), asymptotic
/// series erfc(x) ~ e^{−x²}/(x√π)·Σ_k (−1)^k (2k−1)!!/(2x²)^k beyond.
pub fn ln_erfc(x: f64) -> f64 {
    if x <= 25.0 {
        libm::erfc(x).ln()
    } else {
        let inv2x2 = 1.0 / (2.0 * x * x);
        // (2k−1)!! / (2x²)^k, alternating, k = 0..=5
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..=5u32 {
            term *= -((2 * k - 1) as f64) * inv2x2;
            series += term;
        }
        -x * x - x.ln() - 0.5 * std::f64::consts::PI.ln() + series.ln()
    }
}

/// tanh⁻¹(erf(x)) to full precision across the whole range. Naive
/// composition loses all precision once erf(x) rounds to 1 (x ≳ 6);
/// written via erfc this stays accurate and saturates only at H_MAX.
pub fn stable_atanh_erf(x: f64) -> f64 {
    if x < 0.0 {
        return -stable_atanh_erf(-x);
    }
    if x < 0.5 {
        return libm::atanh(libm::erf(x));
    }
    // atanh(1−erfc) = ½[ln(2−erfc) − ln erfc]
    let lec = ln_erfc(x);
    let erfc = lec.exp();
    clamp_field(0.5 * ((2.0 - erfc).ln() - lec))
}

/// ln((1 + tanh(a)·tanh(b))/2), stable for saturated fields.
#[inline]
pub fn ln_half_one_plus_tanh_prod(a: f64, b: f64) -> f64 {
    l2c(a + b) - l2c(a) - l2c(b)
}

/// atanh(tanh(a)·tanh(b)) = ½·ln(cosh(a+b)/cosh(a−b)), stable and exact
/// in the saturated limits.
#[inline]
pub fn atanh_tanh_prod(a: f64, b: f64) -> f64 {
    clamp_field(0.5 * (l2c(a + b) - l2c(a - b)))
}

/// Binary entropy of the distribution with field x: −Σ p ln p for
/// p = (1 ± tanh x)/2, i.e. ln(2 cosh x) − x tanh x.
#[inline]
pub fn field_entropy(x: f64) -> f64 {
    l2c(x) - x * x.tanh()
}
