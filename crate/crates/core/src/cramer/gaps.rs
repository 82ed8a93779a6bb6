use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::report::{csv_row, real};

pub const MAX_CRAMER_N: u64 = 1 << 32;
pub const HIST_BIN: f64 = 0.05;
pub const HIST_BINS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RateFunction {
    /// `log n`.
    Log,
    /// `log n / (log log n)^{j−1}`.
    IteratedLog {
        j: u32,
    },
    Constant(f64),
    /// `f(n) = values[n − start]`.
    Table {
        start: u64,
        values: Vec<f64>,
    },
}

impl RateFunction {
    pub fn value(&self, n: u64) -> f64 {
        let x = n as f64;
        match self {
            RateFunction::Log => x.ln(),
            RateFunction::IteratedLog { j } => x.ln() / x.ln().ln().powi(*j as i32 - 1),
            RateFunction::Constant(c) => *c,
            RateFunction::Table { start, values } => n
                .checked_sub(*start)
                .and_then(|i| values.get(i as usize))
                .copied()
                .unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CramerConfig {
    pub rate: RateFunction,
    /// Multiplies the rate function.
    pub scale: f64,
    pub n_max: u64,
    pub trials: u32,
    pub seed: u64,
    /// First index simulated; `None` means `max(3, ⌈N^{1/4}⌉)`.
    pub warmup: Option<u64>,
}

impl Default for CramerConfig {
    fn default() -> Self {
        CramerConfig {
            rate: RateFunction::Log,
            scale: 1.0,
            n_max: 100_000,
            trials: 100,
            seed: 1,
            warmup: None,
        }
    }
}

impl CramerConfig {
    pub fn warmup(&self) -> u64 {
        self.warmup
            .unwrap_or_else(|| ((self.n_max as f64).powf(0.25).ceil() as u64).max(3))
    }

    pub fn f(&self, n: u64) -> f64 {
        self.scale * self.rate.value(n)
    }

    /// Checks `f(n) > 1` on `[warmup, N]`; returns whether `f` is nondecreasing there.
    pub fn validate(&self) -> Result<bool> {
        let warmup = self.warmup();
        if warmup < 3 {
            return Err(invalid(format!("warmup = {warmup} must be at least 3")));
        }
        if self.n_max <= warmup || self.n_max > MAX_CRAMER_N {
            return Err(invalid(format!(
                "N = {} must lie in (warmup, 2^32]",
                self.n_max
            )));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(invalid(format!("scale = {} must be positive", self.scale)));
        }
        if let RateFunction::IteratedLog { j } = self.rate {
            if j == 0 {
                return Err(invalid("iterated-log exponent j must be at least 1"));
            }
        }
        let mut monotone = true;
        let mut prev = f64::NEG_INFINITY;
        for n in warmup..=self.n_max {
            let v = self.f(n);
            if !(v > 1.0 && v.is_finite()) {
                return Err(invalid(format!("f({n}) = {v} must exceed 1")));
            }
            monotone &= v >= prev;
            prev = v;
        }
        Ok(monotone)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub trial: u32,
    /// Index of the success `S_k` within the trial, from 1.
    pub k: u64,
    pub s_k: u64,
    pub gap: u64,
    /// `gap / (f(S_k) log S_k)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: u32,
    pub successes: u64,
    pub gaps: u64,
    /// `None` when the trial has fewer than two successes.
    pub max_ratio: Option<f64>,
    pub mean_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub seed: u64,
    pub trials: u32,
    pub warmup: u64,
    pub monotone_rate: bool,
    pub per_trial: Vec<TrialSummary>,
    /// Ratio counts in bins of width `HIST_BIN`; the last bin collects the rest.
    pub histogram: Vec<u64>,
    pub total_gaps: u64,
    pub pooled_mean_gap: Option<f64>,
    /// No trial recorded a gap.
    pub empty: bool,
}

impl GapReport {
    /// Number of trials whose max ratio is at most `bound`.
    pub fn trials_within(&self, bound: f64) -> usize {
        self.per_trial
            .iter()
            .filter(|t| t.max_ratio.is_some_and(|r| r <= bound))
            .count()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialGaps {
    pub summary: TrialSummary,
    pub rows: Vec<GapRow>,
}

/// One trial; the generator is ChaCha8 seeded with `seed ^ trial`.
pub fn simulate_trial(config: &CramerConfig, trial: u32) -> TrialGaps {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ trial as u64);
    let mut rows = Vec::new();
    let mut last: Option<u64> = None;
    let mut k = 0;
    for n in config.warmup()..=config.n_max {
        let f = config.f(n);
        if rng.gen::<f64>() < 1.0 / f {
            if let Some(s) = last {
                let gap = n - s;
                let ratio = gap as f64 / (config.f(s) * (s as f64).ln());
                rows.push(GapRow {
                    trial,
                    k,
                    s_k: s,
                    gap,
                    ratio,
                });
            }
            k += 1;
            last = Some(n);
        }
    }
    TrialGaps {
        summary: summarize(trial, &rows, k),
        rows,
    }
}

fn summarize(trial: u32, rows: &[GapRow], successes: u64) -> TrialSummary {
    let gaps = rows.len() as u64;
    TrialSummary {
        trial,
        successes,
        gaps,
        max_ratio: rows.iter().map(|r| r.ratio).reduce(f64::max),
        mean_gap: (gaps > 0).then(|| rows.iter().map(|r| r.gap as f64).sum::<f64>() / gaps as f64),
    }
}

fn bin(ratio: f64) -> usize {
    ((ratio / HIST_BIN) as usize).min(HIST_BINS)
}

/// Trials `lo..hi`, run in parallel and returned in trial order.
pub fn simulate_trials(config: &CramerConfig, lo: u32, hi: u32) -> Vec<TrialGaps> {
    (lo..hi)
        .into_par_iter()
        .map(|t| simulate_trial(config, t))
        .collect()
}

/// Running totals over trials added in trial order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapAccumulator {
    pub per_trial: Vec<TrialSummary>,
    pub histogram: Vec<u64>,
    pub gap_sum: f64,
    pub total_gaps: u64,
}

impl Default for GapAccumulator {
    fn default() -> Self {
        GapAccumulator {
            per_trial: Vec::new(),
            histogram: vec![0; HIST_BINS + 1],
            gap_sum: 0.0,
            total_gaps: 0,
        }
    }
}

impl GapAccumulator {
    pub fn add(&mut self, trial: &TrialGaps) {
        for r in &trial.rows {
            self.histogram[bin(r.ratio)] += 1;
            self.gap_sum += r.gap as f64;
            self.total_gaps += 1;
        }
        self.per_trial.push(trial.summary.clone());
    }

    pub fn report(&self, config: &CramerConfig, monotone_rate: bool) -> GapReport {
        GapReport {
            seed: config.seed,
            trials: config.trials,
            warmup: config.warmup(),
            monotone_rate,
            per_trial: self.per_trial.clone(),
            histogram: self.histogram.clone(),
            total_gaps: self.total_gaps,
            pooled_mean_gap: (self.total_gaps > 0).then(|| self.gap_sum / self.total_gaps as f64),
            empty: self.total_gaps == 0,
        }
    }
}

/// Merges trial results (in trial order) into a report.
pub fn gap_report(config: &CramerConfig, monotone_rate: bool, trials: &[TrialGaps]) -> GapReport {
    let mut acc = GapAccumulator::default();
    trials.iter().for_each(|t| acc.add(t));
    acc.report(config, monotone_rate)
}

pub fn simulate_gaps(config: &CramerConfig) -> Result<GapReport> {
    let monotone = config.validate()?;
    let trials = simulate_trials(config, 0, config.trials);
    Ok(gap_report(config, monotone, &trials))
}

pub fn write_gaps_header<W: Write>(out: &mut W) -> Result<()> {
    csv_row(out, &["trial", "k", "S_k", "gap", "ratio"])?;
    Ok(())
}

pub fn write_gap_rows<W: Write>(rows: &[GapRow], out: &mut W) -> Result<()> {
    for r in rows {
        csv_row(
            out,
            &[
                r.trial.to_string(),
                r.k.to_string(),
                r.s_k.to_string(),
                r.gap.to_string(),
                real(r.ratio),
            ],
        )?;
    }
    Ok(())
}
