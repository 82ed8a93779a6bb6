use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::primes::build_prime_table;
use crate::report::{csv_row, real};

pub const MAX_PI_K_X: u64 = 100_000_000;

/// `counts[k]` = number of `2 ≤ n ≤ x` with `ω(n) = k`.
pub fn pi_k_counts(x: u64) -> Result<Vec<u64>> {
    if x > MAX_PI_K_X {
        return Err(Error::BudgetExceeded(format!(
            "x = {x} exceeds {MAX_PI_K_X}"
        )));
    }
    if x < 2 {
        return Ok(vec![0]);
    }
    let table = build_prime_table(x)?;
    let mut omega = vec![0u8; x as usize + 1];
    for &p in table.primes() {
        for m in (p..=x).step_by(p as usize) {
            omega[m as usize] += 1;
        }
    }
    let top = omega.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; top + 1];
    for &w in &omega[2..] {
        counts[w as usize] += 1;
    }
    Ok(counts)
}

pub fn count_pi_k(x: u64, k: u32) -> Result<u64> {
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(pi_k_counts(x)?.get(k as usize).copied().unwrap_or(0))
}

/// `(x/log x)·(log log x)^{k−1}/(k−1)!`.
pub fn pi_k_lower_shape(x: u64, k: u32) -> Result<f64> {
    if x < 3 || k < 1 {
        return Err(invalid(format!(
            "need x >= 3 and k >= 1, got x = {x}, k = {k}"
        )));
    }
    let xf = x as f64;
    let ll = xf.ln().ln();
    let log_fact: f64 = (1..k).map(|i| (i as f64).ln()).sum();
    Ok(((xf / xf.ln()).ln() + (k as f64 - 1.0) * ll.ln() - log_fact).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct PiKRow {
    pub x: u64,
    pub k: u32,
    pub count: u64,
    pub lower_bound: f64,
    pub ratio: f64,
}

pub fn density_ratio(x: u64, k: u32) -> Result<PiKRow> {
    let count = count_pi_k(x, k)?;
    pi_k_row(x, k, count)
}

pub fn pi_k_row(x: u64, k: u32, count: u64) -> Result<PiKRow> {
    let lower_bound = pi_k_lower_shape(x, k)?;
    Ok(PiKRow {
        x,
        k,
        count,
        lower_bound,
        ratio: count as f64 / lower_bound,
    })
}

pub fn write_pik_csv<W: Write>(rows: &[PiKRow], mut out: W) -> Result<()> {
    csv_row(&mut out, &["x", "k", "count", "lower_bound", "ratio"])?;
    for r in rows {
        csv_row(
            &mut out,
            &[
                r.x.to_string(),
                r.k.to_string(),
                r.count.to_string(),
                real(r.lower_bound),
                real(r.ratio),
            ],
        )?;
    }
    Ok(())
}
