use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub const MAX_G_SIZE: usize = 10;

/// Calls `f` with the block sizes of every set partition of `{1, …, n}`,
/// walking restricted growth strings in lexicographic order.
pub fn for_each_set_partition(n: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        f(&[]);
        return;
    }
    // a[i] is the block of element i; a[0] = 0 and a[i] <= 1 + max(a[..i])
    let mut a = vec![0usize; n];
    let mut sizes = Vec::with_capacity(n);
    loop {
        sizes.clear();
        for &b in &a {
            if b == sizes.len() {
                sizes.push(0);
            }
            sizes[b] += 1;
        }
        f(&sizes);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            let max_before = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] <= max_before {
                a[i] += 1;
                for v in &mut a[i + 1..] {
                    *v = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Number of set partitions of an `n`-set into `t` blocks, for `t = 0..=n`,
/// by enumeration.
pub fn count_partitions_by_blocks(n: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n + 1];
    for_each_set_partition(n, |sizes| counts[sizes.len()] += 1);
    counts
}

#[derive(Debug, Clone, Serialize)]
pub struct GReport {
    pub s3: usize,
    pub r: f64,
    pub enumeration: f64,
    pub egf: f64,
    pub relative_gap: f64,
}

fn block_weight(size: usize, r: f64) -> f64 {
    2f64.powi(2 * size as i32 + 1) / r.powi(2 * size as i32 - 1)
}

/// `G = Σ_π ∏_{B∈π} 2^{2|B|+1}/R^{2|B|−1}` over set partitions of `[s3]`,
/// both by enumeration and as `s3!·[y^{s3}] exp(Σ_m 2^{2m+1} y^m/(R^{2m−1} m!))`.
pub fn partition_sum_g(s3: usize, r: f64) -> Result<GReport> {
    if s3 > MAX_G_SIZE {
        return Err(Error::BudgetExceeded(format!(
            "s3 = {s3} exceeds {MAX_G_SIZE}"
        )));
    }
    if s3 < 1 {
        return Err(invalid("s3 must be at least 1"));
    }
    if !(r.is_finite() && r > 2.0) {
        return Err(invalid(format!("R = {r} must exceed 2")));
    }
    let mut enumeration = 0.0;
    for_each_set_partition(s3, |sizes| {
        enumeration += sizes.iter().map(|&b| block_weight(b, r)).product::<f64>();
    });
    let egf = egf_coefficient(s3, r)?;
    let relative_gap = (enumeration - egf).abs() / egf.abs();
    Ok(GReport {
        s3,
        r,
        enumeration,
        egf,
        relative_gap,
    })
}

/// `n!·[yⁿ] exp(A(y))` in exact rationals via `g_n = (1/n) Σ_m m·a_m·g_{n−m}`.
fn egf_coefficient(n: usize, r: f64) -> Result<f64> {
    let r = BigRational::from_float(r).ok_or_else(|| invalid("R is not finite"))?;
    let int = |v: u64| BigRational::from_integer(BigInt::from(v));
    let mut a = vec![BigRational::zero(); n + 1];
    let mut fact = BigRational::one();
    for (m, slot) in a.iter_mut().enumerate().skip(1) {
        fact *= int(m as u64);
        let num = num_traits::pow(int(2), 2 * m + 1);
        let den = num_traits::pow(r.clone(), 2 * m - 1) * &fact;
        *slot = num / den;
    }
    let mut g = vec![BigRational::zero(); n + 1];
    g[0] = BigRational::one();
    for k in 1..=n {
        let mut acc = BigRational::zero();
        for m in 1..=k {
            acc += int(m as u64) * &a[m] * &g[k - m];
        }
        g[k] = acc / int(k as u64);
    }
    let n_fact = (1..=n as u64).fold(BigRational::one(), |acc, v| acc * int(v));
    (&g[n] * n_fact)
        .to_f64()
        .ok_or_else(|| Error::NumericFailure("EGF coefficient overflow".into()))
}
