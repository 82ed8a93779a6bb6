use serde::Serialize;

use super::exact::split_powers;
use super::weights::{prob_divides, WeightTable};
use crate::error::{invalid, Result};
use crate::primes::build_prime_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    A,
    B,
    C,
    D,
}

impl std::str::FromStr for Axiom {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Axiom::A),
            "B" => Ok(Axiom::B),
            "C" => Ok(Axiom::C),
            "D" => Ok(Axiom::D),
            _ => Err(invalid(format!("unknown axiom {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomRow {
    pub k: u64,
    pub j: usize,
    pub d: u64,
    pub value: f64,
}

/// Outcome of one axiom check. Only (A) carries a pass/fail verdict; the
/// others report measured quantities.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub passed: Option<bool>,
    /// (A) fraction of mass on multiples of `W`; (B) sup of `d·ℙ(d | n+k)/8^j`;
    /// (C) largest tuple sum; (D) largest absolute deviation.
    pub statistic: f64,
    /// (C) smallest `C₃` with every tuple sum `≤ (C₃ log s)^s`.
    pub fitted_constant: Option<f64>,
    pub evaluated: u64,
    pub budget_exhausted: bool,
    pub rows: Vec<AxiomRow>,
}

/// Depth-first walk over products of distinct primes (ascending) with at
/// most `max_j` factors and product at most `cap`. Stops when `budget`
/// callbacks have run; returns false in that case.
fn walk_tuples(
    primes: &[u64],
    max_j: usize,
    cap: u64,
    budget: &mut u64,
    f: &mut dyn FnMut(&[u64], u64),
) -> bool {
    fn go(
        primes: &[u64],
        start: usize,
        chosen: &mut Vec<u64>,
        prod: u64,
        max_j: usize,
        cap: u64,
        budget: &mut u64,
        f: &mut dyn FnMut(&[u64], u64),
    ) -> bool {
        for i in start..primes.len() {
            let Some(next) = prod.checked_mul(primes[i]).filter(|&v| v <= cap) else {
                break;
            };
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            chosen.push(primes[i]);
            f(chosen, next);
            let ok =
                chosen.len() >= max_j || go(primes, i + 1, chosen, next, max_j, cap, budget, f);
            chosen.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    go(primes, 0, &mut Vec::new(), 1, max_j, cap, budget, f)
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

/// Checks one axiom on `table`. `s` bounds the number of primes per tuple
/// and `budget` the number of tuples evaluated.
pub fn axiom_check(
    which: Axiom,
    table: &WeightTable,
    s: usize,
    budget: u64,
) -> Result<AxiomReport> {
    if s == 0 {
        return Err(invalid("s must be at least 1"));
    }
    let params = table.params();
    let w_mod = table.w_modulus();
    let big_t = params.big_t();
    let mut left = budget;
    let mut report = AxiomReport {
        axiom: which,
        passed: None,
        statistic: 0.0,
        fitted_constant: None,
        evaluated: 0,
        budget_exhausted: false,
        rows: Vec::new(),
    };
    match which {
        Axiom::A => {
            let on: f64 = table
                .entries()
                .filter(|&(n, _)| n % w_mod == 0)
                .map(|(_, v)| v)
                .sum();
            let off = table
                .entries()
                .filter(|&(n, v)| n % w_mod != 0 && v > 0.0)
                .count();
            report.statistic = on / table.total();
            report.passed = Some(off == 0 && table.entries().all(|(n, _)| n % w_mod == 0));
            report.evaluated = table.len() as u64;
        }
        Axiom::B => {
            let primes = build_prime_table(big_t.floor().max(2.0) as u64)?;
            report.rows.push(AxiomRow {
                k: 0,
                j: 0,
                d: 1,
                value: 1.0,
            });
            report.statistic = 1.0;
            'shifts: for k in 1..=params.k_max {
                let r = params.level(k);
                let list: Vec<u64> = primes
                    .primes()
                    .iter()
                    .copied()
                    .filter(|&p| p as f64 > r)
                    .collect();
                let cap = 2 * params.x + k;
                let mut worst = AxiomRow {
                    k,
                    j: 0,
                    d: 1,
                    value: 0.0,
                };
                let complete = walk_tuples(&list, s, cap, &mut left, &mut |ps, d| {
                    let v = d as f64 * prob_divides(d, k, table) / 8f64.powi(ps.len() as i32);
                    if v > worst.value {
                        worst = AxiomRow {
                            k,
                            j: ps.len(),
                            d,
                            value: v,
                        };
                    }
                });
                report.statistic = report.statistic.max(worst.value);
                report.rows.push(worst);
                if !complete {
                    report.budget_exhausted = true;
                    break 'shifts;
                }
            }
        }
        Axiom::C => {
            if s < 2 {
                return Err(invalid("axiom (C) needs s >= 2"));
            }
            let ln_s = (s as f64).ln();
            let mut fit: f64 = 0.0;
            'shifts: for k in 1..=params.big_k as u64 {
                let r = params.level(k);
                let top = r.floor().max(2.0) as u64;
                let primes = build_prime_table(top)?;
                let list: Vec<u64> = primes.primes_in(params.w, top).to_vec();
                let cap = 2 * params.x + k;
                let mut sums = vec![0.0f64; s + 1];
                let complete = walk_tuples(&list, s, cap, &mut left, &mut |ps, d| {
                    sums[ps.len()] += prob_divides(d, k, table);
                });
                for (j, &sum) in sums.iter().enumerate().skip(1) {
                    // ordered tuples of distinct primes
                    let ordered = sum * factorial(j);
                    report.rows.push(AxiomRow {
                        k,
                        j,
                        d: 0,
                        value: ordered,
                    });
                    report.statistic = report.statistic.max(ordered);
                    fit = fit.max(ordered.powf(1.0 / s as f64) / ln_s);
                }
                if !complete {
                    report.budget_exhausted = true;
                    break 'shifts;
                }
            }
            report.fitted_constant = Some(fit);
        }
        Axiom::D => {
            let primes = build_prime_table(big_t.floor().max(2.0) as u64)?;
            let list: Vec<u64> = primes
                .primes()
                .iter()
                .copied()
                .filter(|&p| (p * p) as f64 <= big_t)
                .collect();
            'shifts: for k in 1..=params.k_max {
                let cap = 2 * params.x + k;
                let mut worst = AxiomRow {
                    k,
                    j: 0,
                    d: 1,
                    value: 0.0,
                };
                let mut exps: Vec<(u64, u32)> = Vec::new();
                let complete = walk_tuples(&list, s, cap, &mut left, &mut |ps, _| {
                    // every exponent choice with pᵢ^{aᵢ} ≤ T, aᵢ ≥ 2
                    exps.clear();
                    exps.extend(ps.iter().map(|&p| (p, 2u32)));
                    loop {
                        if let Ok((full, _)) = split_powers(&exps) {
                            if full <= cap {
                                let dev = axiom_d_deviation(table, &exps, k).unwrap_or(0.0).abs();
                                if dev > worst.value || worst.j == 0 {
                                    worst = AxiomRow {
                                        k,
                                        j: exps.len(),
                                        d: full,
                                        value: dev,
                                    };
                                }
                            }
                        }
                        let mut idx = 0;
                        loop {
                            if idx == exps.len() {
                                return;
                            }
                            let (p, a) = exps[idx];
                            if ((p as f64).powi(a as i32 + 1)) <= big_t {
                                exps[idx].1 = a + 1;
                                break;
                            }
                            exps[idx].1 = 2;
                            idx += 1;
                        }
                    }
                });
                report.statistic = report.statistic.max(worst.value);
                report.rows.push(worst);
                if !complete {
                    report.budget_exhausted = true;
                    break 'shifts;
                }
            }
        }
    }
    report.evaluated = report.evaluated.max(budget - left);
    Ok(report)
}

/// `ℙ(∏ pᵢ^{aᵢ} | n + k) − ℙ(∏ pᵢ | n + k) / ∏ pᵢ^{aᵢ−1}`.
pub fn axiom_d_deviation(table: &WeightTable, factors: &[(u64, u32)], k: u64) -> Result<f64> {
    let (full, radical) = split_powers(factors)?;
    Ok(prob_divides(full, k, table) - prob_divides(radical, k, table) / (full / radical) as f64)
}
