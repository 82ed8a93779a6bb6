use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::SieveParams;
use crate::bump::BumpSpec;
use crate::error::{invalid, Error, Result};
use crate::primes::{build_prime_table, factorize, factorize_trial};
use crate::report::{csv_row, real};

/// Largest support (multiples of `W` in `[x, 2x]`) a table may hold.
pub const MAX_SUPPORT: u64 = 1 << 26;

const CHUNK: usize = 1 << 14;
const SAMPLE_CHUNK: usize = 1 << 12;

/// The coefficients `μ(d) η̃(log d / log R)` over squarefree `w`-rough
/// `d < R`, in increasing `d`.
pub fn sieve_coefficients(level: f64, w: u64, spec: &BumpSpec) -> Result<Vec<(u64, f64)>> {
    let top = level.ceil() as u64;
    let table = build_prime_table(top.max(2))?;
    let log_r = level.ln();
    let candidates: Vec<(u64, i8)> = (1..top)
        .filter_map(|d| {
            let f = factorize(d, &table).ok()?;
            let rough = f.factors.iter().all(|&(p, _)| p > w);
            (rough && f.is_squarefree()).then(|| (d, f.mobius()))
        })
        .collect();
    Ok(candidates
        .into_par_iter()
        .filter_map(|(d, mu)| {
            let u = (d as f64).ln() / log_r;
            (u < 1.0).then(|| (d, mu as f64 * spec.eta_tilde(u)))
        })
        .collect())
}

/// `ν(n)` on the multiples of `W` in `[x, 2x]`.
///
/// Entry `i` is `n = first + i·W`. The total and the cumulative masses are
/// summed sequentially in index order.
#[derive(Debug, Clone)]
pub struct WeightTable {
    params: SieveParams,
    levels: Vec<f64>,
    w_mod: u64,
    first: u64,
    nu: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

pub fn build_weight_table(params: &SieveParams, spec: &BumpSpec) -> Result<WeightTable> {
    params.validate()?;
    let w_mod = params.w_modulus()?;
    let x = params.x;
    let first = x.div_ceil(w_mod) * w_mod;
    if first > 2 * x {
        return Err(Error::EmptySupport(format!(
            "no multiple of W = {w_mod} in [{x}, {}]",
            2 * x
        )));
    }
    let len = (2 * x - first) / w_mod + 1;
    if len > MAX_SUPPORT {
        return Err(Error::BudgetExceeded(format!(
            "support of {len} entries exceeds {MAX_SUPPORT}"
        )));
    }
    let len = len as usize;
    let levels = params.levels();
    let coefficients: Vec<Vec<(u64, f64)>> = levels
        .iter()
        .map(|&r| sieve_coefficients(r, params.w, spec))
        .collect::<Result<_>>()?;
    // first index i with d | first + i·W + k, for each (k, d)
    let starts: Vec<Vec<u64>> = coefficients
        .iter()
        .enumerate()
        .map(|(j, coefs)| {
            let k = j as u64 + 1;
            coefs
                .iter()
                .map(|&(d, _)| first_hit(first, w_mod, k, d).unwrap_or(u64::MAX))
                .collect()
        })
        .collect();

    let chunks: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let mut nu = vec![1.0f64; hi - lo];
            let mut s = vec![0.0f64; hi - lo];
            for (coefs, st) in coefficients.iter().zip(&starts) {
                s.iter_mut().for_each(|v| *v = 0.0);
                for (&(d, coef), &i0) in coefs.iter().zip(st) {
                    if i0 == u64::MAX {
                        continue;
                    }
                    let mut i = next_at_least(i0, d, lo as u64);
                    while i < hi as u64 {
                        s[i as usize - lo] += coef;
                        i += d;
                    }
                }
                for (v, &si) in nu.iter_mut().zip(&s) {
                    *v *= si * si;
                }
            }
            nu
        })
        .collect();
    let nu: Vec<f64> = chunks.into_iter().flatten().collect();
    let mut cumulative = Vec::with_capacity(len);
    let mut acc = 0.0;
    for &v in &nu {
        acc += v;
        cumulative.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::EmptySupport("every weight vanishes".into()));
    }
    Ok(WeightTable {
        params: params.clone(),
        levels,
        w_mod,
        first,
        nu,
        cumulative,
        total: acc,
    })
}

/// Smallest `i ≥ 0` with `m | base + i·step + k`, if any.
pub(crate) fn first_hit(base: u64, step: u64, k: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let m128 = m as i128;
    let target = (-((base as i128 + k as i128) % m128)).rem_euclid(m128);
    let s = step as i128 % m128;
    let g = gcd(s as u64, m) as i128;
    if target % g != 0 {
        return None;
    }
    let m2 = m128 / g;
    let inv = mod_inverse((s / g) as u64, m2 as u64)? as i128;
    Some(((target / g) % m2 * inv % m2) as u64)
}

/// Period in `i` of the condition `m | base + i·step + k`.
pub(crate) fn hit_period(step: u64, m: u64) -> u64 {
    m / gcd(step % m, m)
}

fn next_at_least(i0: u64, d: u64, lo: u64) -> u64 {
    if i0 >= lo {
        i0
    } else {
        i0 + (lo - i0).div_ceil(d) * d
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m as i128) as u64)
}

impl WeightTable {
    pub fn params(&self) -> &SieveParams {
        &self.params
    }

    /// `R_1, …, R_K` used to build the table.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn w_modulus(&self) -> u64 {
        self.w_mod
    }

    /// Number of multiples of `W` in the window.
    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    /// `P(1) = Σ ν(n)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn n_at(&self, i: usize) -> u64 {
        self.first + i as u64 * self.w_mod
    }

    pub fn weights(&self) -> &[f64] {
        &self.nu
    }

    /// `(n, ν(n))` over the support, in increasing `n`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.nu.iter().enumerate().map(|(i, &v)| (self.n_at(i), v))
    }

    /// `ν(n)` for any `n`, zero off the support.
    pub fn nu(&self, n: u64) -> f64 {
        if n < self.first || !(n - self.first).is_multiple_of(self.w_mod) {
            return 0.0;
        }
        self.nu
            .get(((n - self.first) / self.w_mod) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// `Σ ν(n) 𝟙_{m | n + k}`, summed in index order.
    pub fn weighted_count(&self, m: u64, k: u64) -> f64 {
        assert!(m >= 1, "divisor must be positive");
        let Some(i0) = first_hit(self.first, self.w_mod, k, m) else {
            return 0.0;
        };
        let step = hit_period(self.w_mod, m) as usize;
        self.nu.iter().skip(i0 as usize).step_by(step).sum()
    }
}

/// `ℙ(d* | n + k*)` under the measure `ν / P(1)`.
pub fn prob_divides(d_star: u64, k_star: u64, table: &WeightTable) -> f64 {
    table.weighted_count(d_star, k_star) / table.total
}

/// `ν(n)` computed from the factorizations of `n + k`, independent of any
/// table.
pub fn nu_exact(n: u64, params: &SieveParams, spec: &BumpSpec) -> Result<f64> {
    params.validate()?;
    if n < params.x || n > 2 * params.x {
        return Err(invalid(format!(
            "n = {n} outside [{}, {}]",
            params.x,
            2 * params.x
        )));
    }
    if !n.is_multiple_of(params.w_modulus()?) {
        return Ok(0.0);
    }
    let mut nu = 1.0;
    for (j, &r) in params.levels().iter().enumerate() {
        let s = inner_sum(n + j as u64 + 1, r, params.w, spec)?;
        nu *= s * s;
    }
    Ok(nu)
}

/// `Σ μ(d) η̃(log d / log R)` over squarefree `w`-rough `d | m` with `d < R`,
/// in increasing `d`.
pub fn inner_sum(m: u64, level: f64, w: u64, spec: &BumpSpec) -> Result<f64> {
    let f = factorize_trial(m)?;
    let primes: Vec<u64> = f
        .factors
        .iter()
        .map(|&(p, _)| p)
        .filter(|&p| p > w && (p as f64) < level)
        .collect();
    let mut divisors: Vec<(u64, bool)> = vec![(1, false)];
    for &p in &primes {
        let extra: Vec<(u64, bool)> = divisors
            .iter()
            .filter_map(|&(d, odd)| d.checked_mul(p).map(|e| (e, !odd)))
            .collect();
        divisors.extend(extra);
    }
    divisors.sort_unstable();
    let log_r = level.ln();
    let mut s = 0.0;
    for (d, odd) in divisors {
        let u = (d as f64).ln() / log_r;
        if u < 1.0 {
            let e = spec.eta_tilde(u);
            s += if odd { -e } else { e };
        }
    }
    Ok(s)
}

/// Draws `count` values of `n` with probability `ν(n) / P(1)`.
///
/// Draws are made in blocks of 4096; block `b` uses the ChaCha stream `b` of
/// `seed`, so the output depends only on `seed` and `count`.
pub fn sample(table: &WeightTable, seed: u64, count: usize) -> Result<Vec<u64>> {
    if count == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    if !(table.total > 0.0) {
        return Err(Error::EmptySupport("measure has zero mass".into()));
    }
    let blocks: Vec<Vec<u64>> = (0..count.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = SAMPLE_CHUNK.min(count - b * SAMPLE_CHUNK);
            (0..n)
                .map(|_| {
                    let r = rng.gen::<f64>() * table.total;
                    let i = table
                        .cumulative
                        .partition_point(|&c| c <= r)
                        .min(table.len() - 1);
                    table.n_at(i)
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

pub const WEIGHTS_HEADER: [&str; 3] = ["n", "nu", "cumulative_mass"];

/// `weights.csv`: `n, nu, cumulative_mass`.
pub fn write_weights_csv<W: Write>(table: &WeightTable, mut out: W) -> Result<()> {
    csv_row(&mut out, &WEIGHTS_HEADER)?;
    write_weights_rows(table, 0..table.len(), &mut out)
}

/// The `weights.csv` rows for the table indices in `range`.
pub fn write_weights_rows<W: Write>(
    table: &WeightTable,
    range: std::ops::Range<usize>,
    out: &mut W,
) -> Result<()> {
    for i in range {
        let n = table.n_at(i);
        csv_row(
            out,
            &[
                n.to_string(),
                real(table.nu[i]),
                real(table.cumulative[i] / table.total),
            ],
        )?;
    }
    Ok(())
}

/// One Monte Carlo divisibility comparison.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbRow {
    pub d_star: u64,
    pub k_star: u64,
    pub exact_prob: f64,
    pub mc_estimate: f64,
    pub mc_sigma: f64,
}

impl ProbRow {
    /// Empirical frequency within `z` binomial standard deviations.
    pub fn within(&self, z: f64) -> bool {
        (self.mc_estimate - self.exact_prob).abs() <= z * self.mc_sigma
    }
}

pub fn divisibility_rows(
    table: &WeightTable,
    samples: &[u64],
    tuples: &[(u64, u64)],
) -> Vec<ProbRow> {
    let n = samples.len() as f64;
    tuples
        .iter()
        .map(|&(d, k)| {
            let exact = prob_divides(d, k, table);
            let hits = samples.iter().filter(|&&s| (s + k) % d == 0).count() as f64;
            ProbRow {
                d_star: d,
                k_star: k,
                exact_prob: exact,
                mc_estimate: hits / n,
                mc_sigma: (exact * (1.0 - exact) / n).sqrt(),
            }
        })
        .collect()
}

/// `probs.csv`: `d_star, k_star, exact_prob, mc_estimate, mc_sigma`.
pub fn write_probs_csv<W: Write>(rows: &[ProbRow], mut out: W) -> Result<()> {
    csv_row(
        &mut out,
        &["d_star", "k_star", "exact_prob", "mc_estimate", "mc_sigma"],
    )?;
    for r in rows {
        csv_row(
            &mut out,
            &[
                r.d_star.to_string(),
                r.k_star.to_string(),
                real(r.exact_prob),
                real(r.mc_estimate),
                real(r.mc_sigma),
            ],
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_hit_solves_the_congruence() {
        for (base, step, k, m) in [
            (30, 30, 1, 7),
            (1_000_020, 30, 2, 11),
            (12, 6, 1, 9),
            (12, 6, 3, 9),
            (30, 30, 0, 1),
        ] {
            match first_hit(base, step, k, m) {
                Some(i) => {
                    assert_eq!((base + i * step + k) % m, 0);
                    assert!((0..i).all(|j| (base + j * step + k) % m != 0));
                    let p = hit_period(step, m);
                    assert_eq!((base + (i + p) * step + k) % m, 0);
                }
                None => assert!((0..m).all(|j| (base + j * step + k) % m != 0)),
            }
        }
    }
}
