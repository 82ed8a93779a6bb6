use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::primes::{build_prime_table, factor_window, factorize, factorize_trial};
use crate::report::{csv_row, real};

pub const MAX_WINDOW: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// `ω(n) ≥ ε log₂ n` in `(x − C log x √(log₂ x), x]`.
    AOmega,
    /// `Ω(n) ≥ ε log₂ n` in the same window.
    BOmega,
    /// `ω(n) ≥ C₀ log₂ n / log₃ n` in `(x − (log(x/2))^d, x]`.
    Weak,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::AOmega => "A-omega",
            Variant::BOmega => "B-Omega",
            Variant::Weak => "weak",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a-omega" | "a" => Ok(Variant::AOmega),
            "b-omega" | "b" => Ok(Variant::BOmega),
            "weak" => Ok(Variant::Weak),
            _ => Err(invalid(format!("unknown variant {s:?}"))),
        }
    }
}

/// `(ε, C)` for the first two variants, `(C₀, d)` for the weak one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchParams {
    pub threshold: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowResult {
    pub x: u64,
    pub variant: Variant,
    pub params: SearchParams,
    pub length: f64,
    pub lo: u64,
    pub hi: u64,
    pub witness: Option<u64>,
    /// `ω` or `Ω` of the witness, re-checked by trial division.
    pub count: Option<u32>,
    pub required: Option<f64>,
    pub members: u64,
}

fn ln2(v: f64) -> f64 {
    v.ln().ln()
}

fn ln3(v: f64) -> f64 {
    v.ln().ln().ln()
}

pub fn window_length(x: u64, variant: Variant, params: SearchParams) -> f64 {
    let xf = x as f64;
    match variant {
        Variant::AOmega | Variant::BOmega => params.width * xf.ln() * ln2(xf).max(0.0).sqrt(),
        Variant::Weak => (xf / 2.0).ln().max(0.0).powf(params.width),
    }
}

/// The membership threshold at `n`; `None` where it is undefined.
pub fn required_count(n: u64, variant: Variant, params: SearchParams) -> Option<f64> {
    let nf = n as f64;
    match variant {
        Variant::AOmega | Variant::BOmega => Some(params.threshold * ln2(nf)),
        Variant::Weak => {
            let l3 = ln3(nf);
            (l3 > 0.0).then(|| params.threshold * ln2(nf) / l3)
        }
    }
}

fn count_of(factors: &[(u64, u32)], variant: Variant) -> u32 {
    match variant {
        Variant::BOmega => factors.iter().map(|&(_, e)| e).sum(),
        _ => factors.len() as u32,
    }
}

fn is_member(n: u64, factors: &[(u64, u32)], variant: Variant, params: SearchParams) -> bool {
    required_count(n, variant, params).is_some_and(|req| count_of(factors, variant) as f64 >= req)
}

/// Largest member of the stated set in the variant's window below `x`, with
/// the window clamped at 2.
pub fn window_search(x: u64, variant: Variant, params: SearchParams) -> Result<WindowResult> {
    if !(params.threshold.is_finite() && params.width.is_finite())
        || params.threshold <= 0.0
        || params.width <= 0.0
    {
        return Err(invalid("search parameters must be finite and positive"));
    }
    if x < 2 {
        return Err(invalid("x must be at least 2"));
    }
    let length = window_length(x, variant, params);
    if !(length >= 1.0) {
        return Err(invalid(format!("window length {length} is below 1")));
    }
    if length > MAX_WINDOW as f64 {
        return Err(Error::BudgetExceeded(format!(
            "window length {length:.3e} exceeds {MAX_WINDOW}"
        )));
    }
    // integers n with x − L < n ≤ x
    let lo = ((x as f64 - length).floor() as i64 + 1).max(2) as u64;
    let primes = build_prime_table(x.isqrt().max(2))?;
    let window = factor_window(lo, x, &primes)?;
    let members: Vec<u64> = (lo..=x)
        .into_par_iter()
        .filter(|&n| is_member(n, window.factors_of(n), variant, params))
        .collect();
    let witness = members.last().copied();
    let mut result = WindowResult {
        x,
        variant,
        params,
        length,
        lo,
        hi: x,
        witness,
        count: None,
        required: None,
        members: members.len() as u64,
    };
    if let Some(n) = witness {
        let check = factorize_trial(n)?;
        if !is_member(n, &check.factors, variant, params) {
            return Err(Error::NumericFailure(format!(
                "witness {n} failed trial-division re-check"
            )));
        }
        result.count = Some(count_of(&check.factors, variant));
        result.required = required_count(n, variant, params);
    }
    Ok(result)
}

pub fn write_witness_csv<W: Write>(results: &[WindowResult], mut out: W) -> Result<()> {
    csv_row(&mut out, &["x", "variant", "params", "witness_or_none"])?;
    for r in results {
        let params = format!("{};{}", real(r.params.threshold), real(r.params.width));
        let witness = r
            .witness
            .map_or_else(|| "none".to_string(), |n| n.to_string());
        csv_row(
            &mut out,
            &[r.x.to_string(), r.variant.to_string(), params, witness],
        )?;
    }
    Ok(())
}

/// The chain `C₀log₂(n−k)/log₃(n−k) ≥ C₀log₂(n/2)/log₃(n/2) ≥ C₀log(k^{1/d})/log₂(k^{1/d})
/// ≥ C₀log k/(d(log log k − log d)) ≥ (C₀/d)·log k/log log k`, evaluated at one `k`.
#[derive(Debug, Clone, Serialize)]
pub struct ChainCheck {
    pub k: u64,
    pub omega: u32,
    pub terms: Vec<f64>,
    /// Each term is at least the next, and `ω(n−k)` at least the first.
    pub holds: bool,
}

pub fn chain_check(n: u64, k: u64, omega: u32, c0: f64, d: f64) -> Result<ChainCheck> {
    if k < 1 || k >= n {
        return Err(invalid(format!("k = {k} must lie in [1, n)")));
    }
    let m = (n - k) as f64;
    let half = n as f64 / 2.0;
    let kf = k as f64;
    let root = kf.powf(1.0 / d);
    let terms = vec![
        c0 * ln2(m) / ln3(m),
        c0 * ln2(half) / ln3(half),
        c0 * root.ln() / ln2(root),
        c0 * kf.ln() / (d * (kf.ln().ln() - d.ln())),
        (c0 / d) * kf.ln() / kf.ln().ln(),
    ];
    let holds = terms.iter().all(|t| t.is_finite())
        && omega as f64 >= terms[0]
        && terms.windows(2).all(|w| w[0] >= w[1]);
    Ok(ChainCheck {
        k,
        omega,
        terms,
        holds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RefuteResult {
    pub n: u64,
    pub delta: f64,
    pub budget: u64,
    pub scanned: u64,
    pub k: Option<u64>,
    pub omega: Option<u32>,
    pub threshold: Option<f64>,
    /// The window search for `(C₀, d)` below `n`, when requested.
    pub window: Option<WindowResult>,
    pub chain: Option<ChainCheck>,
}

/// First `k ≥ 3` with `ω(n−k) > (1+δ) log k / log log k`, scanning at most
/// `budget` shifts. With `weak = Some((C₀, d))` the weak-variant window below
/// `n` is searched too and the chain inequality is evaluated at its witness.
pub fn erdos679_refuter(
    n: u64,
    delta: f64,
    budget: u64,
    weak: Option<(f64, f64)>,
) -> Result<RefuteResult> {
    if n < 1_000_000 {
        return Err(invalid(format!("n = {n} must be at least 10^6")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!("delta = {delta} must be positive")));
    }
    let primes = build_prime_table(n.isqrt().max(2))?;
    let limit = (n - 2).min(3u64.saturating_add(budget).saturating_sub(1));
    let threshold = |k: u64| (1.0 + delta) * (k as f64).ln() / (k as f64).ln().ln();
    let mut result = RefuteResult {
        n,
        delta,
        budget,
        scanned: 0,
        k: None,
        omega: None,
        threshold: None,
        window: None,
        chain: None,
    };
    for k in 3..=limit {
        result.scanned += 1;
        let w = factorize(n - k, &primes)?.omega();
        if w as f64 > threshold(k) {
            let check = factorize_trial(n - k)?.omega();
            if check != w || !(check as f64 > threshold(k)) {
                return Err(Error::NumericFailure(format!(
                    "k = {k} failed the re-check"
                )));
            }
            result.k = Some(k);
            result.omega = Some(w);
            result.threshold = Some(threshold(k));
            break;
        }
    }
    if let Some((c0, d)) = weak {
        let win = window_search(
            n,
            Variant::Weak,
            SearchParams {
                threshold: c0,
                width: d,
            },
        )?;
        if let (Some(m), Some(om)) = (win.witness, win.count) {
            if m < n {
                result.chain = Some(chain_check(n, n - m, om, c0, d)?);
            }
        }
        result.window = Some(win);
    }
    Ok(result)
}
