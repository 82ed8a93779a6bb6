//! Bit-exact variant of the weight table for windows of at most `10⁴`
//! integers: every `η̃` coefficient is rounded to a multiple of `2⁻⁴⁰` and
//! all sums are carried out in big integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::weights::{first_hit, hit_period, sieve_coefficients};
use super::SieveParams;
use crate::bump::BumpSpec;
use crate::error::{invalid, Error, Result};

pub const DYADIC_BITS: u32 = 40;
pub const MAX_EXACT_WINDOW: u64 = 10_000;

/// `ν(n) · 2^{80K}` as exact integers over the multiples of `W` in `[x, 2x]`.
#[derive(Debug, Clone)]
pub struct ExactWeightTable {
    first: u64,
    w_mod: u64,
    nu: Vec<BigInt>,
    total: BigInt,
}

/// `round(v · 2⁴⁰)`.
pub fn to_dyadic(v: f64) -> i64 {
    (v * (1u64 << DYADIC_BITS) as f64).round() as i64
}

pub fn build_exact_weight_table(params: &SieveParams, spec: &BumpSpec) -> Result<ExactWeightTable> {
    params.validate()?;
    if params.x + 1 > MAX_EXACT_WINDOW {
        return Err(Error::BudgetExceeded(format!(
            "exact mode needs a window of at most {MAX_EXACT_WINDOW} integers, x = {}",
            params.x
        )));
    }
    let w_mod = params.w_modulus()?;
    let x = params.x;
    let first = x.div_ceil(w_mod) * w_mod;
    if first > 2 * x {
        return Err(Error::EmptySupport(format!(
            "no multiple of W = {w_mod} in [{x}, {}]",
            2 * x
        )));
    }
    let len = ((2 * x - first) / w_mod + 1) as usize;
    let mut nu = vec![BigInt::from(1); len];
    for (j, &r) in params.levels().iter().enumerate() {
        let k = j as u64 + 1;
        let coefs: Vec<(u64, i64)> = sieve_coefficients(r, params.w, spec)?
            .into_iter()
            .map(|(d, c)| (d, to_dyadic(c)))
            .collect();
        for (i, v) in nu.iter_mut().enumerate() {
            let m = first + i as u64 * w_mod + k;
            let s: i128 = coefs
                .iter()
                .filter(|&&(d, _)| m.is_multiple_of(d))
                .map(|&(_, q)| q as i128)
                .sum();
            *v *= BigInt::from(s * s);
        }
    }
    let total: BigInt = nu.iter().sum();
    if total.is_zero() {
        return Err(Error::EmptySupport("every weight vanishes".into()));
    }
    Ok(ExactWeightTable {
        first,
        w_mod,
        nu,
        total,
    })
}

impl ExactWeightTable {
    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn total(&self) -> &BigInt {
        &self.total
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, &BigInt)> + '_ {
        self.nu
            .iter()
            .enumerate()
            .map(|(i, v)| (self.first + i as u64 * self.w_mod, v))
    }

    pub fn weighted_count(&self, m: u64, k: u64) -> BigInt {
        if m == 0 {
            return BigInt::zero();
        }
        let Some(i0) = first_hit(self.first, self.w_mod, k, m) else {
            return BigInt::zero();
        };
        let step = hit_period(self.w_mod, m) as usize;
        self.nu.iter().skip(i0 as usize).step_by(step).sum()
    }

    pub fn prob_divides(&self, d_star: u64, k_star: u64) -> BigRational {
        BigRational::new(self.weighted_count(d_star, k_star), self.total.clone())
    }

    /// `ℙ(∏ pᵢ^{aᵢ} | n + k) − ℙ(∏ pᵢ | n + k) / ∏ pᵢ^{aᵢ−1}`, exactly.
    pub fn power_deviation(&self, factors: &[(u64, u32)], k: u64) -> Result<BigRational> {
        let (full, radical) = split_powers(factors)?;
        let lhs = self.prob_divides(full, k);
        let rhs =
            self.prob_divides(radical, k) / BigRational::from_integer(BigInt::from(full / radical));
        Ok(lhs - rhs)
    }
}

pub(crate) fn split_powers(factors: &[(u64, u32)]) -> Result<(u64, u64)> {
    let mut full: u64 = 1;
    let mut radical: u64 = 1;
    for &(p, a) in factors {
        if a == 0 {
            return Err(invalid("exponents must be positive"));
        }
        let pa = p
            .checked_pow(a)
            .ok_or_else(|| invalid("prime power overflows"))?;
        full = full
            .checked_mul(pa)
            .ok_or_else(|| invalid("modulus overflows"))?;
        radical *= p;
    }
    Ok((full, radical))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
