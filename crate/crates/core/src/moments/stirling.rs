use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};

/// Stirling numbers of the second kind `{s, t}` for `1 ≤ t ≤ s ≤ max_s`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    max_s: usize,
    /// Row `s` holds `{s, 0}, …, {s, s}`.
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn new(max_s: usize) -> Result<Self> {
        if max_s == 0 {
            return Err(invalid("max_s must be at least 1"));
        }
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for s in 1..=max_s {
            let prev = &rows[s - 1];
            let mut row = vec![BigUint::zero(); s + 1];
            for t in 1..=s {
                let stay = if t < s {
                    &prev[t] * BigUint::from(t)
                } else {
                    BigUint::zero()
                };
                row[t] = stay + &prev[t - 1];
            }
            rows.push(row);
        }
        Ok(StirlingTable { max_s, rows })
    }

    pub fn max_s(&self) -> usize {
        self.max_s
    }

    pub fn get(&self, s: usize, t: usize) -> Result<&BigUint> {
        if t < 1 || t > s || s > self.max_s {
            return Err(invalid(format!(
                "need 1 <= t <= s <= {}, got s = {s}, t = {t}",
                self.max_s
            )));
        }
        Ok(&self.rows[s][t])
    }

    /// `Σ_t {s, t}`, the Bell number.
    pub fn bell(&self, s: usize) -> Result<BigUint> {
        if s < 1 || s > self.max_s {
            return Err(invalid(format!("need 1 <= s <= {}, got {s}", self.max_s)));
        }
        Ok(self.rows[s].iter().sum())
    }
}

pub fn stirling2(s: usize, t: usize) -> Result<BigUint> {
    if t < 1 || t > s {
        return Err(invalid(format!("need 1 <= t <= s, got s = {s}, t = {t}")));
    }
    Ok(StirlingTable::new(s)?.get(s, t)?.clone())
}

/// `m!/(m−j)!`.
pub fn falling_factorial(m: u64, j: u64) -> BigUint {
    if j > m {
        return BigUint::zero();
    }
    (m - j + 1..=m).fold(BigUint::one(), |acc, v| acc * v)
}

/// Checks `Σ_{j=1}^{2s} {2s, j}·m!/(m−j)! = m^{2s}` in big integers.
pub fn stirling_identity_check(s: usize, m: u64) -> Result<bool> {
    if s < 1 || m < 2 * s as u64 {
        return Err(invalid(format!("need m >= 2s >= 2, got s = {s}, m = {m}")));
    }
    let table = StirlingTable::new(2 * s)?;
    stirling_identity_with(&table, s, m)
}

pub(crate) fn stirling_identity_with(table: &StirlingTable, s: usize, m: u64) -> Result<bool> {
    let lhs: BigUint = (1..=2 * s)
        .map(|j| Ok(table.get(2 * s, j)? * falling_factorial(m, j as u64)))
        .sum::<Result<BigUint>>()?;
    Ok(lhs == BigUint::from(m).pow(2 * s as u32))
}

#[derive(Debug, Clone, Serialize)]
pub struct StirlingBoundFit {
    pub s_lo: usize,
    pub s_hi: usize,
    /// Smallest `κ` with `{s, t} ≤ κ·(s/log s)^s` over the range.
    pub kappa: f64,
    /// Where the maximum ratio is attained.
    pub s_at: usize,
    pub t_at: usize,
}

/// Fits `κ` in `{s, t} ≤ κ·(s/log s)^s` over `s ∈ [s_lo, s_hi]`.
pub fn stirling_bound_fit(s_lo: usize, s_hi: usize) -> Result<StirlingBoundFit> {
    if s_lo < 2 || s_lo > s_hi {
        return Err(invalid(format!(
            "need 2 <= s_lo <= s_hi, got [{s_lo}, {s_hi}]"
        )));
    }
    let table = StirlingTable::new(s_hi)?;
    let mut best = StirlingBoundFit {
        s_lo,
        s_hi,
        kappa: 0.0,
        s_at: s_lo,
        t_at: 1,
    };
    for s in s_lo..=s_hi {
        let sf = s as f64;
        let log_scale = sf * (sf / sf.ln()).ln();
        for t in 1..=s {
            let v = ln_big(table.get(s, t)?);
            let ratio = (v - log_scale).exp();
            if ratio > best.kappa {
                best = StirlingBoundFit {
                    kappa: ratio,
                    s_at: s,
                    t_at: t,
                    ..best
                };
            }
        }
    }
    Ok(best)
}

fn ln_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (v >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Serialize)]
pub struct FallingFactorialRow {
    pub m: u64,
    pub j: u64,
    pub holds: bool,
}

/// A rational lower bound on `e` from the first 21 terms of `Σ 1/n!`, and
/// the matching upper bound obtained by adding the geometric tail.
fn e_bounds() -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for n in 0..=20u32 {
        if n > 0 {
            term /= BigRational::from_integer(BigInt::from(n));
        }
        sum += &term;
    }
    // tail < term/20
    let upper = &sum + &term / BigRational::from_integer(BigInt::from(20));
    (sum, upper)
}

/// Certifies `m^j ≤ e^j·m!/(m−j)!` for every `j ≥ 1`, `3j/2 ≤ m ≤ m_max`.
///
/// Each inequality is decided exactly with rational bounds on `e`; a row is
/// `holds = true` only when the lower bound already suffices.
pub fn falling_factorial_check(m_max: u64) -> Result<Vec<FallingFactorialRow>> {
    if m_max < 2 {
        return Err(invalid("m_max must be at least 2"));
    }
    let (e_lo, e_hi) = e_bounds();
    let mut rows = Vec::new();
    for m in 2..=m_max {
        for j in 1..=(2 * m / 3) {
            let lhs = BigRational::from_integer(BigInt::from(BigUint::from(m).pow(j as u32)));
            let ff = BigRational::from_integer(BigInt::from(falling_factorial(m, j)));
            let lo = num_traits::pow(e_lo.clone(), j as usize) * &ff;
            let holds = if lhs <= lo {
                true
            } else if lhs > num_traits::pow(e_hi.clone(), j as usize) * &ff {
                false
            } else {
                return Err(crate::Error::NumericFailure(format!(
                    "m = {m}, j = {j} is undecided"
                )));
            };
            rows.push(FallingFactorialRow { m, j, holds });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct C1Check {
    pub c1: f64,
    pub required: f64,
    pub holds: bool,
    /// Which of `8e·C₃′`, `132·A·e`, `2¹⁹·e` is largest.
    pub binding: &'static str,
}

/// `C₁ ≥ max{8e·C₃′, 132·A·e, 2¹⁹·e}` as plain arithmetic.
pub fn c1_condition(c1: f64, c3_prime: f64, big_a: f64) -> Result<C1Check> {
    if !(c1.is_finite() && c3_prime.is_finite() && big_a.is_finite())
        || c3_prime <= 0.0
        || big_a <= 0.0
    {
        return Err(invalid("constants must be finite and positive"));
    }
    let e = std::f64::consts::E;
    let terms = [
        ("8e*C3'", 8.0 * e * c3_prime),
        ("132*A*e", 132.0 * big_a * e),
        ("2^19*e", 524_288.0 * e),
    ];
    let (binding, required) = terms
        .iter()
        .copied()
        .fold(terms[0], |a, b| if b.1 > a.1 { b } else { a });
    Ok(C1Check {
        c1,
        required,
        holds: c1 >= required,
        binding,
    })
}
