use serde::Serialize;

use crate::error::{invalid, Result};
use crate::primes::build_prime_table;

/// Parameters of the sieve weight at desk scale.
///
/// Sieve levels follow `R_k = max(x^{c/k^γ}, w)` for `k ≤ K` and `R_k = w`
/// beyond, unless `custom_levels` overrides the first `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveParams {
    pub x: u64,
    /// Number of sieved shifts `K`.
    pub big_k: usize,
    /// Tiny-prime cutoff.
    pub w: u64,
    /// Exponent of each tiny prime in `W = ∏_{p≤w} p^a`.
    pub a: u32,
    pub c: f64,
    pub gamma: f64,
    /// `T = x^{t_exponent}`.
    pub t_exponent: f64,
    pub big_a: f64,
    pub k_max: u64,
    pub custom_levels: Option<Vec<f64>>,
}

impl Default for SieveParams {
    fn default() -> Self {
        SieveParams {
            x: 10_000_000,
            big_k: 2,
            w: 5,
            a: 1,
            c: 0.2,
            gamma: 2.0,
            t_exponent: 0.5,
            big_a: 1.0,
            k_max: 100,
            custom_levels: None,
        }
    }
}

impl SieveParams {
    /// `x = 10⁶`, `K = 2`, `w = 5`, `a = 1`, `R₁ = x^{0.2} ≈ 15.8`, `R₂ = w`.
    pub fn toy() -> Self {
        SieveParams {
            x: 1_000_000,
            gamma: 1.5,
            ..SieveParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x < 2 || self.x > (1 << 61) {
            return Err(invalid(format!("x = {} must lie in [2, 2^61]", self.x)));
        }
        if self.big_k < 1 {
            return Err(invalid("K must be at least 1"));
        }
        if self.w < 2 {
            return Err(invalid(format!("w = {} must be at least 2", self.w)));
        }
        if self.big_k as u64 > self.w {
            return Err(invalid(format!(
                "K = {} must not exceed w = {}",
                self.big_k, self.w
            )));
        }
        if self.a < 1 {
            return Err(invalid("a must be at least 1"));
        }
        if !(self.c.is_finite() && self.c > 0.0 && self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid("need c > 0 and gamma >= 0"));
        }
        if !(self.t_exponent > 0.0 && self.t_exponent <= 1.0) {
            return Err(invalid("T_exponent must lie in (0, 1]"));
        }
        if !(self.big_a.is_finite() && self.big_a > 0.0) {
            return Err(invalid("A must be positive"));
        }
        if self.k_max < self.big_k as u64 || self.k_max > 1 << 20 {
            return Err(invalid(format!(
                "k_max = {} must lie in [K, 2^20]",
                self.k_max
            )));
        }
        if let Some(levels) = &self.custom_levels {
            if levels.len() != self.big_k {
                return Err(invalid("custom_levels must list exactly K levels"));
            }
            if levels
                .iter()
                .any(|&r| !(r.is_finite() && r >= self.w as f64))
            {
                return Err(invalid("custom levels must be finite and at least w"));
            }
        }
        self.w_modulus()?;
        let theta = self.theta()?;
        if theta >= 1.0 {
            return Err(invalid(format!(
                "infeasible parameters: log W + 2 Σ log R_k = {theta:.4} log x, need < log x"
            )));
        }
        Ok(())
    }

    /// `W = ∏_{p ≤ w} p^a`.
    pub fn w_modulus(&self) -> Result<u64> {
        let primes = build_prime_table(self.w.max(2))?;
        let mut m: u64 = 1;
        for &p in primes.primes() {
            for _ in 0..self.a {
                m = m.checked_mul(p).ok_or_else(|| {
                    invalid(format!("W overflows for w = {}, a = {}", self.w, self.a))
                })?;
            }
        }
        Ok(m)
    }

    /// Sieve level `R_k` for any shift `k ≥ 1`.
    pub fn level(&self, k: u64) -> f64 {
        let w = self.w as f64;
        if k == 0 || k > self.big_k as u64 {
            return w;
        }
        if let Some(levels) = &self.custom_levels {
            return levels[k as usize - 1];
        }
        (self.x as f64)
            .powf(self.c / (k as f64).powf(self.gamma))
            .max(w)
    }

    /// `R_1, …, R_K`.
    pub fn levels(&self) -> Vec<f64> {
        (1..=self.big_k as u64).map(|k| self.level(k)).collect()
    }

    pub fn big_t(&self) -> f64 {
        (self.x as f64).powf(self.t_exponent)
    }

    /// `θ = (log W + 2 Σ_{k≤K} log R_k) / log x`.
    pub fn theta(&self) -> Result<f64> {
        let w = self.w_modulus()? as f64;
        let s: f64 = self.levels().iter().map(|r| r.ln()).sum();
        Ok((w.ln() + 2.0 * s) / (self.x as f64).ln())
    }

    /// True when no prime lies in `(w, R_k]`.
    pub fn medium_range_empty(&self, k: u64) -> bool {
        let r = self.level(k).floor() as u64;
        (self.w + 1..=r).all(|n| (2..).take_while(|d| d * d <= n).any(|d| n % d == 0))
    }
}
