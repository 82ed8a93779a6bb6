use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::primes::{build_prime_table, factor_window, PrimeTable, WindowFactors};
use crate::report::{csv_row, real};
use crate::sieve::WeightTable;
use crate::sum::ordered_sum;

pub const MAX_MOMENT_ORDER: u32 = 12;
pub const DEFAULT_C3: f64 = 3.0;

/// Prime ranges of the moment bounds.
///
/// `Tiny` counts `p^j | n+k` with `p ≤ w`, `j ≥ 5`, `p^j ≤ T`; `Medium` and
/// `Large` count primes in `(w, R_k]` and `(R_k, T]`; `Power` counts
/// `p^j | n+k` with `p > w`, `j ≥ 2`, `p^j ≤ T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeRange {
    Tiny,
    Medium,
    Large,
    Power,
}

impl PrimeRange {
    pub const ALL: [PrimeRange; 4] = [
        PrimeRange::Tiny,
        PrimeRange::Medium,
        PrimeRange::Large,
        PrimeRange::Power,
    ];
}

impl fmt::Display for PrimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimeRange::Tiny => "tiny",
            PrimeRange::Medium => "medium",
            PrimeRange::Large => "large",
            PrimeRange::Power => "power",
        })
    }
}

impl FromStr for PrimeRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PrimeRange::ALL
            .into_iter()
            .find(|r| r.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| invalid(format!("unknown prime range {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub k: u64,
    pub range: PrimeRange,
    pub s: u32,
    pub centered: bool,
    /// The subtracted mean `Σ 1/p^j` (zero when not centered).
    pub center: f64,
    /// `𝔼[X^s]`.
    pub signed_moment: f64,
    /// `𝔼|X|^s`.
    pub exact_moment: f64,
    pub paper_bound: f64,
    pub ratio: f64,
    pub empty_range: bool,
}

/// A weight table together with the factorizations of `n + k` for every
/// support point and `1 ≤ k ≤ max_shift`.
pub struct ShiftedSupport<'a> {
    table: &'a WeightTable,
    window: WindowFactors,
    primes: PrimeTable,
    max_shift: u64,
    c3: f64,
}

/// Per-prime counting rule for one range at one shift.
struct RangeRule {
    w: u64,
    level: f64,
    big_t: f64,
    range: PrimeRange,
}

impl RangeRule {
    /// Largest `j` with `p^j ≤ T`.
    fn top_power(&self, p: u64) -> u32 {
        let mut j = 0;
        let mut v = 1.0;
        while v * p as f64 <= self.big_t {
            v *= p as f64;
            j += 1;
        }
        j
    }

    fn count(&self, p: u64, e: u32) -> u32 {
        let pf = p as f64;
        match self.range {
            PrimeRange::Medium => u32::from(p > self.w && pf <= self.level),
            PrimeRange::Large => u32::from(pf > self.level && pf <= self.big_t),
            PrimeRange::Tiny if p <= self.w => e.min(self.top_power(p)).saturating_sub(4),
            PrimeRange::Power if p > self.w => e.min(self.top_power(p)).saturating_sub(1),
            _ => 0,
        }
    }

    /// `(Σ 1/p^j over the counted prime powers, whether that set is empty)`.
    fn center(&self, primes: &PrimeTable) -> (f64, bool) {
        let mut sum = 0.0;
        let mut any = false;
        let mut add = |p: u64, lo: u32, hi: u32| {
            for j in lo..=hi {
                sum += (p as f64).powi(-(j as i32));
                any = true;
            }
        };
        let top = self.big_t.floor() as u64;
        match self.range {
            PrimeRange::Medium => {
                for &p in primes.primes_in(self.w, self.level.floor() as u64) {
                    add(p, 1, 1);
                }
            }
            PrimeRange::Large => {
                if self.level < self.big_t {
                    for &p in primes.primes_in(self.level.floor() as u64, top) {
                        add(p, 1, 1);
                    }
                }
            }
            PrimeRange::Tiny => {
                for &p in primes.primes_in(0, self.w) {
                    add(p, 5, self.top_power(p));
                }
            }
            PrimeRange::Power => {
                for &p in primes.primes_in(self.w, top.isqrt()) {
                    add(p, 2, self.top_power(p));
                }
            }
        }
        (sum, !any)
    }
}

impl<'a> ShiftedSupport<'a> {
    pub fn new(table: &'a WeightTable, max_shift: u64) -> Result<Self> {
        if max_shift < 1 {
            return Err(invalid("max_shift must be at least 1"));
        }
        if table.is_empty() {
            return Err(Error::EmptySupport("weight table has no entries".into()));
        }
        let lo = table.n_at(0) + 1;
        let hi = table.n_at(table.len() - 1) + max_shift;
        let params = table.params();
        let top_level = params.levels().into_iter().fold(params.big_t(), f64::max);
        let limit = (hi.isqrt() + 1).max(top_level.floor() as u64).max(2);
        let primes = build_prime_table(limit)?;
        let window = factor_window(lo, hi, &primes)?;
        Ok(ShiftedSupport {
            table,
            window,
            primes,
            max_shift,
            c3: DEFAULT_C3,
        })
    }

    /// Sets the constant `C₃` used in the medium-range display bound.
    pub fn with_c3(mut self, c3: f64) -> Self {
        self.c3 = c3;
        self
    }

    pub fn table(&self) -> &WeightTable {
        self.table
    }

    pub fn max_shift(&self) -> u64 {
        self.max_shift
    }

    pub fn prime_table(&self) -> &PrimeTable {
        &self.primes
    }

    /// Factorization of `n_at(i) + k`.
    pub fn factors(&self, i: usize, k: u64) -> &[(u64, u32)] {
        self.window.factors_of(self.table.n_at(i) + k)
    }

    pub fn big_omega(&self, i: usize, k: u64) -> u32 {
        self.factors(i, k).iter().map(|&(_, e)| e).sum()
    }

    fn check_shift(&self, k: u64) -> Result<()> {
        if k < 1 || k > self.max_shift {
            return Err(invalid(format!(
                "shift k = {k} outside [1, {}]",
                self.max_shift
            )));
        }
        Ok(())
    }

    fn rule(&self, k: u64, range: PrimeRange) -> RangeRule {
        let params = self.table.params();
        RangeRule {
            w: params.w,
            level: params.level(k),
            big_t: params.big_t(),
            range,
        }
    }

    /// Per-support-point values of `X = Σ counts − [centered]·center`, and the center.
    fn values(&self, k: u64, range: PrimeRange, centered: bool) -> Result<(Vec<f64>, f64, bool)> {
        self.check_shift(k)?;
        let rule = self.rule(k, range);
        let (center, empty) = rule.center(&self.primes);
        let shift = if centered { center } else { 0.0 };
        let xs = (0..self.table.len())
            .map(|i| {
                let c: u32 = self
                    .factors(i, k)
                    .iter()
                    .map(|&(p, e)| rule.count(p, e))
                    .sum();
                c as f64 - shift
            })
            .collect();
        Ok((xs, if centered { center } else { 0.0 }, empty))
    }

    fn expectation(&self, g: impl Fn(usize) -> f64 + Sync) -> f64 {
        let weights = self.table.weights();
        ordered_sum(weights.len(), |i| weights[i] * g(i)) / self.table.total()
    }

    pub fn moment(
        &self,
        k: u64,
        range: PrimeRange,
        s: u32,
        centered: bool,
    ) -> Result<MomentReport> {
        if !(1..=MAX_MOMENT_ORDER).contains(&s) {
            return Err(invalid(format!(
                "s = {s} must lie in [1, {MAX_MOMENT_ORDER}]"
            )));
        }
        let (xs, center, empty) = self.values(k, range, centered)?;
        let paper_bound = self.paper_bound(k, range, s);
        let mut report = MomentReport {
            k,
            range,
            s,
            centered,
            center,
            signed_moment: 0.0,
            exact_moment: 0.0,
            paper_bound,
            ratio: 0.0,
            empty_range: empty,
        };
        if empty {
            return Ok(report);
        }
        report.signed_moment = self.expectation(|i| xs[i].powi(s as i32));
        report.exact_moment = self.expectation(|i| xs[i].abs().powi(s as i32));
        report.ratio = report.exact_moment / paper_bound;
        Ok(report)
    }

    /// `ℙ(|X| ≥ r)`.
    pub fn tail(&self, k: u64, range: PrimeRange, centered: bool, r: f64) -> Result<f64> {
        let (xs, _, _) = self.values(k, range, centered)?;
        Ok(self.expectation(|i| if xs[i].abs() >= r { 1.0 } else { 0.0 }))
    }

    /// Right-hand sides of the moment bounds at the configured constants:
    /// `(2C₃s)^s`, `(132·A·log k)^s`, `2^{19s}`, `2^s`.
    pub fn paper_bound(&self, k: u64, range: PrimeRange, s: u32) -> f64 {
        let s_f = s as f64;
        match range {
            PrimeRange::Medium => (2.0 * self.c3 * s_f).powf(s_f),
            PrimeRange::Large => (132.0 * self.table.params().big_a * (k as f64).ln()).powf(s_f),
            PrimeRange::Tiny => 2f64.powf(19.0 * s_f),
            PrimeRange::Power => 2f64.powf(s_f),
        }
    }
}

/// Moment of one range at shift `k`, building the shifted factorizations on
/// the fly.
pub fn exact_centered_moment(
    table: &WeightTable,
    k: u64,
    range: PrimeRange,
    s: u32,
    centered: bool,
) -> Result<MomentReport> {
    ShiftedSupport::new(table, k.max(1))?.moment(k, range, s, centered)
}

pub fn exact_tail(
    table: &WeightTable,
    k: u64,
    range: PrimeRange,
    centered: bool,
    r: f64,
) -> Result<f64> {
    ShiftedSupport::new(table, k.max(1))?.tail(k, range, centered, r)
}

/// `min(1, moment / r^s)`.
pub fn chebyshev_tail(moment: f64, r: f64, s: u32) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("r = {r} must be positive")));
    }
    if s < 1 {
        return Err(invalid("s must be at least 1"));
    }
    if !(moment >= 0.0) {
        return Err(invalid(format!("moment = {moment} must be nonnegative")));
    }
    Ok((moment / r.powi(s as i32)).clamp(0.0, 1.0))
}

/// Smallest `C₃` with `𝔼|X|^s ≤ (2C₃s)^s` for every report given.
pub fn fit_c3(reports: &[MomentReport]) -> Option<f64> {
    reports
        .iter()
        .filter(|r| !r.empty_range && r.exact_moment > 0.0)
        .map(|r| r.exact_moment.powf(1.0 / r.s as f64) / (2.0 * r.s as f64))
        .reduce(f64::max)
}

pub fn write_moments_csv<W: Write>(reports: &[MomentReport], mut out: W) -> Result<()> {
    csv_row(
        &mut out,
        &["k", "range", "s", "exact_moment", "paper_bound", "ratio"],
    )?;
    for r in reports {
        csv_row(
            &mut out,
            &[
                r.k.to_string(),
                r.range.to_string(),
                r.s.to_string(),
                real(r.exact_moment),
                real(r.paper_bound),
                real(r.ratio),
            ],
        )?;
    }
    Ok(())
}
