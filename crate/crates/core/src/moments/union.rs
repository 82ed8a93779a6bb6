use std::io::Write;

use serde::Serialize;

use super::moment::ShiftedSupport;
use crate::error::{invalid, Result};
use crate::primes::factorize_trial;
use crate::report::{csv_row, real};
use crate::sieve::{SieveParams, WeightTable};
use crate::sum::ordered_sum;

/// `max_{2≤k≤k_max} Ω(n+k)/log k` for the support point at index `i`.
pub fn record_score(support: &ShiftedSupport, i: usize, k_max: u64) -> f64 {
    (2..=k_max)
        .map(|k| support.big_omega(i, k) as f64 / (k as f64).ln())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordWitness {
    pub n: u64,
    pub score: f64,
    /// `Ω(n+k)` for `k = 2..=k_max`.
    pub profile: Vec<u32>,
}

fn check_k_max(support: &ShiftedSupport, k_max: u64) -> Result<()> {
    if k_max < 2 || k_max > support.max_shift() {
        return Err(invalid(format!(
            "k_max = {k_max} must lie in [2, {}]",
            support.max_shift()
        )));
    }
    Ok(())
}

/// Scores of every support point with positive weight, as `(index, score)`.
pub fn record_scores(support: &ShiftedSupport, k_max: u64) -> Result<Vec<(usize, f64)>> {
    check_k_max(support, k_max)?;
    let weights = support.table().weights();
    Ok((0..weights.len())
        .filter(|&i| weights[i] > 0.0)
        .map(|i| (i, record_score(support, i, k_max)))
        .collect())
}

/// The support point minimizing the record score; ties go to the smallest `n`.
pub fn record_witness(support: &ShiftedSupport, k_max: u64) -> Result<Option<RecordWitness>> {
    let best = record_scores(support, k_max)?.into_iter().fold(
        None,
        |acc: Option<(usize, f64)>, (i, s)| match acc {
            Some((_, b)) if b <= s => acc,
            _ => Some((i, s)),
        },
    );
    Ok(best.map(|(i, score)| RecordWitness {
        n: support.table().n_at(i),
        score,
        profile: (2..=k_max).map(|k| support.big_omega(i, k)).collect(),
    }))
}

/// The best record score among sampled support points (ties go to the
/// earliest draw). Samples off the support are an error.
pub fn sampled_record_witness(
    support: &ShiftedSupport,
    k_max: u64,
    samples: &[u64],
) -> Result<Option<RecordWitness>> {
    check_k_max(support, k_max)?;
    let table = support.table();
    let first = table.n_at(0);
    let step = table.w_modulus();
    let mut best: Option<(usize, f64)> = None;
    for &n in samples {
        if n < first
            || !(n - first).is_multiple_of(step)
            || ((n - first) / step) as usize >= table.len()
        {
            return Err(invalid(format!("sample {n} is not a support point")));
        }
        let i = ((n - first) / step) as usize;
        let score = record_score(support, i, k_max);
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((i, score));
        }
    }
    Ok(best.map(|(i, score)| RecordWitness {
        n: table.n_at(i),
        score,
        profile: (2..=k_max).map(|k| support.big_omega(i, k)).collect(),
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct UnionBoundRow {
    pub k: u64,
    pub tail_prob: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnionBoundReport {
    pub c: f64,
    pub k_max: u64,
    pub rows: Vec<UnionBoundRow>,
    /// `Σ_k ℙ(Ω(n+k) > C log k)`.
    pub sum: f64,
    pub witness: Option<RecordWitness>,
}

pub fn union_bound_with(support: &ShiftedSupport, c: f64, k_max: u64) -> Result<UnionBoundReport> {
    if !c.is_finite() || c < 0.0 {
        return Err(invalid(format!("C = {c} must be finite and nonnegative")));
    }
    check_k_max(support, k_max)?;
    let table = support.table();
    let weights = table.weights();
    let rows: Vec<UnionBoundRow> = (2..=k_max)
        .map(|k| {
            let cut = c * (k as f64).ln();
            let mass = ordered_sum(weights.len(), |i| {
                if support.big_omega(i, k) as f64 > cut {
                    weights[i]
                } else {
                    0.0
                }
            });
            UnionBoundRow {
                k,
                tail_prob: mass / table.total(),
            }
        })
        .collect();
    let sum = rows.iter().map(|r| r.tail_prob).sum();
    Ok(UnionBoundReport {
        c,
        k_max,
        rows,
        sum,
        witness: record_witness(support, k_max)?,
    })
}

pub fn union_bound_report(table: &WeightTable, c: f64, k_max: u64) -> Result<UnionBoundReport> {
    union_bound_with(&ShiftedSupport::new(table, k_max.max(2))?, c, k_max)
}

pub fn write_union_bound_csv<W: Write>(reports: &[UnionBoundReport], mut out: W) -> Result<()> {
    csv_row(&mut out, &["k", "C", "tail_prob"])?;
    for rep in reports {
        for row in &rep.rows {
            csv_row(
                &mut out,
                &[row.k.to_string(), real(rep.c), real(row.tail_prob)],
            )?;
        }
    }
    Ok(())
}

/// `log₂(n+k)`, an upper bound for `Ω(n+k)`.
pub fn trivial_tail_bound(n: u64, k: u64) -> Result<f64> {
    let m = n.checked_add(k).ok_or_else(|| invalid("n + k overflows"))?;
    if m < 2 {
        return Err(invalid("n + k must be at least 2"));
    }
    Ok((m as f64).log2())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCount {
    pub primes: u32,
    /// Counted with multiplicity.
    pub weighted: u32,
}

impl ClassCount {
    fn add(&mut self, e: u32) {
        self.primes += 1;
        self.weighted += e;
    }
}

/// Prime factors of `n+k` split by size. Primes `p ≤ w` are tiny whatever
/// their exponent; a larger prime is higher-power when its exponent is at
/// least 2 and otherwise medium (`≤ R_k`), large (`≤ T`) or very large.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OmegaParts {
    pub tiny: ClassCount,
    pub medium: ClassCount,
    pub large: ClassCount,
    pub very_large: ClassCount,
    pub higher_power: ClassCount,
}

impl OmegaParts {
    pub fn total(&self) -> u32 {
        [
            self.tiny,
            self.medium,
            self.large,
            self.very_large,
            self.higher_power,
        ]
        .iter()
        .map(|c| c.weighted)
        .sum()
    }
}

/// Splits `Ω(n+k)`; factors `n+k` by trial division.
pub fn omega_decomposition(n: u64, k: u64, params: &SieveParams) -> Result<OmegaParts> {
    let m = n.checked_add(k).ok_or_else(|| invalid("n + k overflows"))?;
    if m < 1 {
        return Err(invalid("n + k must be positive"));
    }
    let level = params.level(k);
    let big_t = params.big_t();
    let mut parts = OmegaParts::default();
    for (p, e) in factorize_trial(m)?.factors {
        let pf = p as f64;
        let class = if p <= params.w {
            &mut parts.tiny
        } else if e >= 2 {
            &mut parts.higher_power
        } else if pf <= level {
            &mut parts.medium
        } else if pf <= big_t {
            &mut parts.large
        } else {
            &mut parts.very_large
        };
        class.add(e);
    }
    Ok(parts)
}
