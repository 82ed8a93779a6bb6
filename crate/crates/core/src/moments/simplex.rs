use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub const MAX_SIMPLEX_POINTS: f64 = 2e9;

const FIRST_PRIMES: [f64; 6] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0];

/// `log ρ_r(α) = Σ αᵢ log(32/(αᵢ qᵢ⁵))` with `qᵢ` the `i`-th prime.
pub fn log_rho(alpha: &[f64]) -> Result<f64> {
    if alpha.is_empty() || alpha.len() > FIRST_PRIMES.len() {
        return Err(invalid(format!("r = {} must lie in [1, 6]", alpha.len())));
    }
    Ok(alpha
        .iter()
        .zip(FIRST_PRIMES)
        .map(|(&a, q)| {
            if a > 0.0 {
                a * (32.0f64.ln() - a.ln() - 5.0 * q.ln())
            } else {
                0.0
            }
        })
        .sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoReport {
    pub r: usize,
    /// Grid resolution: coordinates are multiples of `1/grid`.
    pub grid: u32,
    pub argmax: Vec<f64>,
    pub log_rho_max: f64,
    pub log_rho_uniform: f64,
    /// `max_i |argmaxᵢ − 1/r|`.
    pub distance_to_uniform: f64,
    pub points: u64,
}

/// Maximizes `ρ_r` over the grid points of the ordered simplex
/// `{α ∈ (0,1)^r : Σα = 1, α₁ ≤ ⋯ ≤ α_r}`.
pub fn rho_r_maximize(r: usize, grid: u32) -> Result<RhoReport> {
    if !(1..=6).contains(&r) {
        return Err(invalid(format!("r = {r} must lie in [1, 6]")));
    }
    if (grid as usize) < r {
        return Err(invalid(format!("grid = {grid} must be at least r = {r}")));
    }
    let n = grid as usize;
    let uniform = vec![1.0 / r as f64; r];
    let log_rho_uniform = log_rho(&uniform)?;
    if r == 1 {
        return Ok(RhoReport {
            r,
            grid,
            argmax: vec![1.0],
            log_rho_max: log_rho_uniform,
            log_rho_uniform,
            distance_to_uniform: 0.0,
            points: 1,
        });
    }
    // partitions of n into r parts, roughly n^{r−1}/(r!(r−1)!)
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let estimate = (n as f64).powi(r as i32 - 1) / (fact(r) * fact(r - 1));
    if estimate > MAX_SIMPLEX_POINTS {
        return Err(Error::BudgetExceeded(format!(
            "about {estimate:.3e} grid points for r = {r}, grid = {grid}"
        )));
    }
    let step = 1.0 / n as f64;
    let best = (1..=n / r)
        .into_par_iter()
        .map(|first| {
            let mut parts = vec![first; r];
            let mut best = Best {
                value: f64::NEG_INFINITY,
                parts: Vec::new(),
                points: 0,
            };
            walk(&mut parts, 1, n - first, step, &mut best);
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(
            Best {
                value: f64::NEG_INFINITY,
                parts: Vec::new(),
                points: 0,
            },
            |acc, b| {
                let points = acc.points + b.points;
                if b.value > acc.value {
                    Best { points, ..b }
                } else {
                    Best { points, ..acc }
                }
            },
        );
    let argmax: Vec<f64> = best.parts.iter().map(|&p| p as f64 * step).collect();
    let distance_to_uniform = argmax
        .iter()
        .map(|a| (a - 1.0 / r as f64).abs())
        .fold(0.0, f64::max);
    Ok(RhoReport {
        r,
        grid,
        argmax,
        log_rho_max: best.value,
        log_rho_uniform,
        distance_to_uniform,
        points: best.points,
    })
}

struct Best {
    value: f64,
    parts: Vec<usize>,
    points: u64,
}

/// Fills `parts[i..]` with nondecreasing values `≥ parts[i−1]` summing to `left`.
fn walk(parts: &mut [usize], i: usize, left: usize, step: f64, best: &mut Best) {
    let r = parts.len();
    let lo = parts[i - 1];
    if i == r - 1 {
        if left < lo {
            return;
        }
        parts[i] = left;
        best.points += 1;
        let alpha: Vec<f64> = parts.iter().map(|&p| p as f64 * step).collect();
        let v = log_rho(&alpha).unwrap_or(f64::NEG_INFINITY);
        if v > best.value {
            best.value = v;
            best.parts = parts.to_vec();
        }
        return;
    }
    let slots = r - i;
    for v in lo..=left / slots {
        parts[i] = v;
        walk(parts, i + 1, left - v, step, best);
    }
}
