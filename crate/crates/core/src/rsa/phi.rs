//! The class-pick probability P̂(n,q) = λ n/(q−n+1) ₂F₁(1, 1−n; q−n+2; λ).
//!
//! Evaluated via the defining recursion P̂(m+1,q) = λ(m+1)/(q−m)·(1−P̂(m,q))
//! for small arguments and by a series expansion in (x, ρ) =
//! (q − n(1−λ), nλ/x) when x ≥ 40, where the expansion through x⁻² keeps
//! the error below 1e-5.
//!
//! The forward recursion amplifies rounding error once λ(m+1)/(q−m) exceeds
//! one, so above the balance point m* = (q−λ)/(1+λ) it is run backwards from
//! the closed-form endpoint P̂(q,q) = 1 − (1−λ)^q, where the amplification
//! factors invert and the iteration is contractive.

use super::RsaError;

/// Crossover point for the series expansion.
const SERIES_X_MIN: f64 = 40.0;
/// Largest q for which recursion rows are memoized.
pub const TABLE_Q_MAX: usize = 256;

pub fn phi(n: usize, q: usize, lambda: f64) -> Result<f64, RsaError> {
    if n > q || q == 0 {
        return Err(RsaError::PhiDomain { n, q, lambda });
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(RsaError::PhiDomain { n, q, lambda });
    }
    let x = q as f64 - n as f64 * (1.0 - lambda);
    if x >= SERIES_X_MIN {
        Ok(phi_series(n, q, lambda))
    } else {
        Ok(phi_recursion(n, q, lambda))
    }
}

#[inline]
fn balance_point(q: usize, lambda: f64) -> usize {
    ((q as f64 - lambda) / (1.0 + lambda)).floor() as usize
}

/// Stable evaluation of the recursion at a single (n, q).
pub fn phi_recursion(n: usize, q: usize, lambda: f64) -> f64 {
    if n <= balance_point(q, lambda) {
        let mut p = 0.0;
        for m in 0..n {
            p = lambda * (m + 1) as f64 / (q - m) as f64 * (1.0 - p);
        }
        p
    } else {
        let mut p = 1.0 - (1.0 - lambda).powi(q as i32);
        for m in (n..q).rev() {
            p = 1.0 - p * (q - m) as f64 / (lambda * (m + 1) as f64);
        }
        p
    }
}

pub fn phi_series(n: usize, q: usize, lambda: f64) -> f64 {
    let x = q as f64 - n as f64 * (1.0 - lambda);
    let rho = n as f64 * lambda / x;
    rho * (1.0
        - (1.0 - rho) * (1.0 - lambda) / x
            * (1.0 + (1.0 - (2.0 - 3.0 * rho) * (1.0 - lambda)) / x))
}

/// Memoized recursion rows at a fixed λ. A row for quota `q` holds
/// P̂(n,q) for all n ≤ q; rows are built on first use with the same
/// forward/backward split as `phi_recursion`.
pub struct PhiTable {
    lambda: f64,
    rows: Vec<Option<Vec<f64>>>,
}

impl PhiTable {
    pub fn new(lambda: f64) -> PhiTable {
        PhiTable {
            lambda,
            rows: vec![None; TABLE_Q_MAX + 1],
        }
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eval(&mut self, n: usize, q: usize) -> f64 {
        debug_assert!(n <= q && q > 0);
        let x = q as f64 - n as f64 * (1.0 - self.lambda);
        if x >= SERIES_X_MIN {
            return phi_series(n, q, self.lambda);
        }
        if q <= TABLE_Q_MAX {
            let lambda = self.lambda;
            let row = self.rows[q].get_or_insert_with(|| {
                let m_star = balance_point(q, lambda).min(q);
                let mut row = vec![0.0; q + 1];
                let mut p = 0.0;
                for m in 0..m_star {
                    p = lambda * (m + 1) as f64 / (q - m) as f64 * (1.0 - p);
                    row[m + 1] = p;
                }
                let mut p = 1.0 - (1.0 - lambda).powi(q as i32);
                row[q] = p;
                for m in (m_star + 1..q).rev() {
                    p = 1.0 - p * (q - m) as f64 / (lambda * (m + 1) as f64);
                    row[m] = p;
                }
                row
            });
            row[n]
        } else {
            phi_recursion(n, q, self.lambda)
        }
    }
}
