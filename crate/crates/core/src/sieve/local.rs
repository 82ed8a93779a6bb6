use num_complex::Complex64;
use serde::Serialize;

use super::SieveParams;
use crate::error::{invalid, Error, Result};
use crate::primes::{factorize_trial, PrimeTable};

/// Arguments of one local factor `E_{k*,d*,p}(t, t′)`. `t` and `t_prime`
/// carry one entry per sieved shift `1..=K`.
#[derive(Debug, Clone, Serialize)]
pub struct LocalFactorQuery {
    pub k_star: u64,
    pub d_star: u64,
    pub p: u64,
    pub t: Vec<f64>,
    pub t_prime: Vec<f64>,
}

/// The unique `k ∈ [1, K]` with `p | k − k*`, if any.
pub fn uniqueness_of_k_star_p(p: u64, k_star: u64, params: &SieveParams) -> Result<Option<u64>> {
    if p <= params.w {
        return Err(invalid(format!("p = {p} must exceed w = {}", params.w)));
    }
    let hits: Vec<u64> = (1..=params.big_k as u64)
        .filter(|&k| k.abs_diff(k_star) % p == 0)
        .collect();
    match hits.as_slice() {
        [] => Ok(None),
        [k] => Ok(Some(*k)),
        _ => Err(invalid(format!(
            "several shifts {hits:?} share p = {p}; need K <= w < p"
        ))),
    }
}

/// `p^{−z/log R}` for complex `z`.
fn p_pow(p: f64, z: Complex64, log_r: f64) -> Complex64 {
    (-z * (p.ln() / log_r)).exp()
}

fn check_query(q: &LocalFactorQuery, params: &SieveParams) -> Result<()> {
    if q.p <= params.w {
        return Err(invalid(format!("p = {} must exceed w = {}", q.p, params.w)));
    }
    if q.t.len() != params.big_k || q.t_prime.len() != params.big_k {
        return Err(invalid(format!(
            "t and t' need exactly K = {} entries",
            params.big_k
        )));
    }
    if q.d_star == 0 {
        return Err(invalid("d* must be positive"));
    }
    Ok(())
}

/// `E_{k*,d*,p}(t, t′)` in its three cases: `p ∤ d*`, `p | d*` with a shift
/// `k_{*,p}`, and `p | d*` without one.
pub fn local_factor_e(q: &LocalFactorQuery, params: &SieveParams) -> Result<Complex64> {
    check_query(q, params)?;
    let f = factorize_trial(q.d_star)?;
    if !f.is_squarefree() {
        return Err(invalid(format!("d* = {} is not squarefree", q.d_star)));
    }
    if f.factors.iter().any(|&(r, _)| r <= params.w) {
        return Err(invalid(format!(
            "d* = {} has a prime factor <= w",
            q.d_star
        )));
    }
    if q.d_star.is_multiple_of(q.p) {
        factor_dividing(q, params)
    } else {
        Ok(factor_coprime(q, params))
    }
}

fn factor_dividing(q: &LocalFactorQuery, params: &SieveParams) -> Result<Complex64> {
    let p = q.p as f64;
    Ok(match uniqueness_of_k_star_p(q.p, q.k_star, params)? {
        None => Complex64::new(1.0 / p, 0.0),
        Some(k) => {
            let log_r = params.level(k).ln();
            let j = k as usize - 1;
            let a = Complex64::new(1.0, 0.0) - p_pow(p, Complex64::new(1.0, q.t[j]), log_r);
            let b = Complex64::new(1.0, 0.0) - p_pow(p, Complex64::new(1.0, q.t_prime[j]), log_r);
            a * b / p
        }
    })
}

fn factor_coprime(q: &LocalFactorQuery, params: &SieveParams) -> Complex64 {
    let p = q.p as f64;
    let mut e = Complex64::new(1.0, 0.0);
    for k in 0..params.big_k {
        let log_r = params.level(k as u64 + 1).ln();
        let z = Complex64::new(1.0, q.t[k]);
        let zp = Complex64::new(1.0, q.t_prime[k]);
        e -= (p_pow(p, z, log_r) + p_pow(p, zp, log_r) - p_pow(p, z + zp, log_r)) / p;
    }
    e
}

#[derive(Debug, Clone, Serialize)]
pub struct EulerProduct {
    pub cutoff: u64,
    pub value: Complex64,
    /// The product up to `2·cutoff`.
    pub doubled: Complex64,
    /// `|doubled − value| / |value|`.
    pub relative_delta: f64,
}

/// `∏_{w < p ≤ cutoff} E_{k*,d*,p}(t, t′)`, with the same product up to
/// `2·cutoff` for a convergence report.
pub fn euler_product_f(
    t: &[f64],
    t_prime: &[f64],
    d_star: u64,
    k_star: u64,
    params: &SieveParams,
    cutoff: u64,
    table: &PrimeTable,
) -> Result<EulerProduct> {
    let doubled_cutoff = cutoff.saturating_mul(2);
    if doubled_cutoff > table.limit() {
        return Err(Error::TableTooSmall {
            needed: doubled_cutoff,
            limit: table.limit(),
        });
    }
    let mut q = LocalFactorQuery {
        k_star,
        d_star,
        p: params.w + 1,
        t: t.to_vec(),
        t_prime: t_prime.to_vec(),
    };
    check_query(&q, params)?;
    let f = factorize_trial(d_star)?;
    if !f.is_squarefree() || f.factors.iter().any(|&(r, _)| r <= params.w) {
        return Err(invalid(format!(
            "d* = {d_star} must be squarefree and w-rough"
        )));
    }
    let mut value = Complex64::new(1.0, 0.0);
    let mut running = value;
    for &p in table.primes_in(params.w, doubled_cutoff) {
        q.p = p;
        let e = if d_star.is_multiple_of(p) {
            factor_dividing(&q, params)?
        } else {
            factor_coprime(&q, params)
        };
        running *= e;
        if p <= cutoff {
            value = running;
        }
    }
    let relative_delta = (running - value).norm() / value.norm();
    Ok(EulerProduct {
        cutoff,
        value,
        doubled: running,
        relative_delta,
    })
}
