//! Prime tables, single-integer factorization and the classical arithmetic
//! functions ω, Ω, τ and μ.
//!
//! A [`PrimeTable`] stores the primes and a smallest-prime-factor array up to
//! its limit. Integers above the limit are factored by trial division with the
//! table primes, which is exact as long as the table covers `√n`. Contiguous
//! windows far above the limit go through [`factor_window`].

mod dump;
mod window;

pub use dump::{load_prime_table, write_prime_table, PRIME_TABLE_MAGIC};
pub use window::{factor_window, WindowFactors};

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Largest smallest-prime-factor array we are willing to allocate.
pub const MAX_TABLE_LIMIT: u64 = 100_000_000;

/// Primes and smallest prime factors for every integer in `2..=limit`.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    spf: Vec<u32>,
}

/// Builds the table with a linear sieve.
pub fn build_prime_table(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(invalid(format!(
            "prime table limit must be at least 2, got {limit}"
        )));
    }
    if limit > MAX_TABLE_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "prime table limit {limit} exceeds the {MAX_TABLE_LIMIT} entry budget"
        )));
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u64> = Vec::with_capacity(estimate_prime_count(limit));
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u64);
        }
        let si = spf[i] as u64;
        for &p in &primes {
            if p > si {
                break;
            }
            let j = i as u64 * p;
            if j > limit {
                break;
            }
            spf[j as usize] = p as u32;
        }
    }
    Ok(PrimeTable { limit, primes, spf })
}

fn estimate_prime_count(limit: u64) -> usize {
    let x = limit as f64;
    (1.26 * x / x.ln().max(1.0)) as usize + 16
}

impl PrimeTable {
    pub(crate) fn from_parts(limit: u64, primes: Vec<u64>, spf: Vec<u32>) -> Self {
        PrimeTable { limit, primes, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Smallest prime factor of `n` for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            None
        } else {
            Some(self.spf[n as usize] as u64)
        }
    }

    pub fn is_prime(&self, n: u64) -> Option<bool> {
        if n < 2 {
            Some(false)
        } else {
            self.spf(n).map(|p| p == n)
        }
    }

    /// Primes `p` with `lo < p <= hi`, clipped to the table.
    pub fn primes_in(&self, lo: u64, hi: u64) -> &[u64] {
        let start = self.primes.partition_point(|&p| p <= lo);
        let end = self.primes.partition_point(|&p| p <= hi);
        &self.primes[start..end.max(start)]
    }

    /// True when every prime up to `√n` is in the table.
    pub fn covers_sqrt(&self, n: u64) -> bool {
        n.isqrt() <= self.limit
    }

    fn require_sqrt(&self, n: u64) -> Result<()> {
        if self.covers_sqrt(n) {
            Ok(())
        } else {
            Err(Error::TableTooSmall {
                needed: n.isqrt(),
                limit: self.limit,
            })
        }
    }
}

/// Prime factorization `n = ∏ pᵢ^eᵢ` with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// ω(n), the number of distinct prime factors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Ω(n), prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// τ(n) = ∏(eᵢ + 1).
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn mobius(&self) -> i8 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Multiplies the factors back together; `None` on overflow.
    pub fn reconstruct(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, &(p, e)| {
            (0..e).try_fold(acc, |a, _| a.checked_mul(p))
        })
    }
}

/// Factors `n` using the table's smallest-prime-factor array, or trial
/// division by table primes when `n` exceeds the limit.
pub fn factorize(n: u64, table: &PrimeTable) -> Result<Factorization> {
    if n == 0 {
        return Err(invalid("cannot factor 0"));
    }
    let mut factors = Vec::new();
    if n <= table.limit {
        let mut m = n;
        while m > 1 {
            let p = table.spf[m as usize] as u64;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    } else {
        table.require_sqrt(n)?;
        let mut m = n;
        for &p in &table.primes {
            if p * p > m {
                break;
            }
            if m.is_multiple_of(p) {
                let mut e = 0;
                while m.is_multiple_of(p) {
                    m /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        if m > 1 {
            factors.push((m, 1));
        }
    }
    Ok(Factorization { n, factors })
}

/// Plain trial division by 2 and odd numbers. Slow, table free; used to
/// re-verify search results.
pub fn factorize_trial(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(invalid("cannot factor 0"));
    }
    let mut m = n;
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            let mut e = 0;
            while m.is_multiple_of(d) {
                m /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { n, factors })
}

pub fn omega(n: u64, table: &PrimeTable) -> Result<u32> {
    factorize(n, table).map(|f| f.omega())
}

pub fn big_omega(n: u64, table: &PrimeTable) -> Result<u32> {
    factorize(n, table).map(|f| f.big_omega())
}

pub fn tau(n: u64, table: &PrimeTable) -> Result<u64> {
    factorize(n, table).map(|f| f.tau())
}

/// μ(n). Returns 0 as soon as a repeated prime shows up.
pub fn mobius(n: u64, table: &PrimeTable) -> Result<i8> {
    if n == 0 {
        return Err(invalid("μ(0) is undefined"));
    }
    if n > table.limit {
        return factorize(n, table).map(|f| f.mobius());
    }
    let mut m = n;
    let mut sign = 1i8;
    while m > 1 {
        let p = table.spf[m as usize] as u64;
        m /= p;
        if m.is_multiple_of(p) {
            return Ok(0);
        }
        sign = -sign;
    }
    Ok(sign)
}

/// `Σ 1/p` over primes `lo < p <= hi`.
pub fn mertens_partial_sum(lo: f64, hi: f64, table: &PrimeTable) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
        return Err(invalid(format!("bad prime range ({lo}, {hi}]")));
    }
    if hi > table.limit as f64 {
        return Err(Error::TableTooSmall {
            needed: hi.ceil() as u64,
            limit: table.limit,
        });
    }
    let primes = table.primes_in(lo.floor() as u64, hi.floor() as u64);
    Ok(primes.iter().map(|&p| 1.0 / p as f64).sum())
}
