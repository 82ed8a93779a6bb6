//! The smooth bump `η` used by the sieve weights.
//!
//! `η` is the normalized autocorrelation of a base bump `η₀` supported in
//! `[−1/2, 1/2]`:
//!
//! ```text
//! η(u) = (η₀ * η₀)(u) / (η₀ * η₀)(0),      η̂(t) = (1/2π) ∫ η(u) e^{itu} du
//! ```
//!
//! so `η` is supported in `[−1, 1]`, `η(0) = 1` and `η̂(t) = F(t)² / (2π (η₀ * η₀)(0))`
//! with `F(t) = ∫ η₀(v) cos(tv) dv`, which makes `η̂ ≥ 0` hold exactly.
//! The twist `η̃(u) = e^{−u} η(u)` enters the sieve weights, and
//! `c₀ = ∫₀^∞ η̃′(u)² du` is computed both directly and from `η̂`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quad::{simpson, simpson_richardson, simpson_samples, simpson_weight};
use crate::report::{csv_row, real};

pub type RealFn = fn(f64) -> f64;

/// `u ↦ exp(−1/(1 − 4u²))` on `(−1/2, 1/2)`, zero elsewhere.
pub fn standard_bump(u: f64) -> f64 {
    let q = 1.0 - 4.0 * u * u;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

pub fn standard_bump_derivative(u: f64) -> f64 {
    let q = 1.0 - 4.0 * u * u;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp() * (-8.0 * u / (q * q))
    }
}

/// Base bump `η₀`. A custom base must be even, nonnegative, and vanish at
/// `±1/2`; it is only ever evaluated inside `(−1/2, 1/2)`.
#[derive(Debug, Clone, Copy)]
pub enum BaseBump {
    Standard,
    Custom { value: RealFn, derivative: RealFn },
}

impl BaseBump {
    fn value(&self, u: f64) -> f64 {
        match self {
            BaseBump::Standard => standard_bump(u),
            BaseBump::Custom { value, .. } => {
                if u.abs() < 0.5 {
                    value(u)
                } else {
                    0.0
                }
            }
        }
    }

    fn derivative(&self, u: f64) -> f64 {
        match self {
            BaseBump::Standard => standard_bump_derivative(u),
            BaseBump::Custom { derivative, .. } => {
                if u.abs() < 0.5 {
                    derivative(u)
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let BaseBump::Custom { value, derivative } = self else {
            return Ok(());
        };
        let peak = value(0.0);
        if !(peak.is_finite() && peak > 0.0) {
            return Err(invalid("custom bump must be positive at 0"));
        }
        for i in 1..500 {
            let u = 0.5 * i as f64 / 500.0;
            let (a, b) = (value(u), value(-u));
            if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
                return Err(invalid(format!(
                    "custom bump negative or non-finite near u = {u}"
                )));
            }
            if (a - b).abs() > 1e-12 * peak {
                return Err(invalid(format!(
                    "custom bump is not even: η₀({u}) ≠ η₀(−{u})"
                )));
            }
            if (derivative(u) + derivative(-u)).abs() > 1e-9 * peak.max(derivative(u).abs()) {
                return Err(invalid(format!(
                    "custom bump derivative is not odd at u = {u}"
                )));
            }
        }
        for u in [0.5, -0.5] {
            if value(u).abs() > 1e-14 * peak {
                return Err(invalid("custom bump is not supported in [-1/2, 1/2]"));
            }
        }
        Ok(())
    }
}

/// Quadrature settings. `u_panels` and `t_max / t_step` must be multiples of
/// 4 so that every grid also carries a half-resolution Richardson check.
#[derive(Debug, Clone, Copy)]
pub struct BumpConfig {
    pub base: BaseBump,
    /// Simpson panels for each convolution integral.
    pub conv_panels: usize,
    /// Panels of the cached `η`, `η′` grid on `[0, 1]`.
    pub u_panels: usize,
    pub t_max: f64,
    pub t_step: f64,
}

impl Default for BumpConfig {
    fn default() -> Self {
        BumpConfig {
            base: BaseBump::Standard,
            conv_panels: 2000,
            u_panels: 2000,
            t_max: 200.0,
            t_step: 0.05,
        }
    }
}

/// A validated bump with cached samples of `η`, `η′` on `[0, 1]` and of `η̂`
/// on `[0, t_max]`.
#[derive(Debug, Clone)]
pub struct BumpSpec {
    config: BumpConfig,
    conv0: f64,
    base_grid: Vec<f64>,
    base_h: f64,
    u_h: f64,
    eta_grid: Vec<f64>,
    eta_prime_grid: Vec<f64>,
    t_count: usize,
    eta_hat_grid: Vec<f64>,
}

pub fn make_bump(config: BumpConfig) -> Result<BumpSpec> {
    config.base.validate()?;
    if config.conv_panels < 8 || config.u_panels < 8 || !config.u_panels.is_multiple_of(4) {
        return Err(invalid(
            "conv_panels >= 8 and u_panels a positive multiple of 4 required",
        ));
    }
    if !(config.t_max > 0.0 && config.t_step > 0.0 && config.t_step < config.t_max) {
        return Err(invalid("need 0 < t_step < t_max"));
    }
    let ratio = config.t_max / config.t_step;
    let t_count = ratio.round() as usize;
    if (ratio - t_count as f64).abs() > 1e-9 * ratio || !t_count.is_multiple_of(2) {
        return Err(invalid("t_max / t_step must be an even integer"));
    }

    let base = config.base;
    let conv0 = simpson(-0.5, 0.5, config.conv_panels, |v| {
        let e = base.value(v);
        e * e
    });
    if !(conv0.is_finite() && conv0 > 0.0) {
        return Err(Error::NumericFailure(format!(
            "bad normalization (η₀ * η₀)(0) = {conv0}"
        )));
    }

    // η₀ on [0, 1/2] for the cosine transform
    let base_panels = 2 * config.conv_panels;
    let base_h = 0.5 / base_panels as f64;
    let base_grid: Vec<f64> = (0..=base_panels)
        .map(|i| base.value(i as f64 * base_h))
        .collect();

    let mut spec = BumpSpec {
        config,
        conv0,
        base_grid,
        base_h,
        u_h: 1.0 / config.u_panels as f64,
        eta_grid: Vec::new(),
        eta_prime_grid: Vec::new(),
        t_count,
        eta_hat_grid: Vec::new(),
    };
    let pairs: Vec<(f64, f64)> = (0..=config.u_panels)
        .into_par_iter()
        .map(|i| {
            let u = i as f64 * spec.u_h;
            (spec.eta_direct(u), spec.eta_prime_direct(u))
        })
        .collect();
    (spec.eta_grid, spec.eta_prime_grid) = pairs.into_iter().unzip();
    spec.eta_hat_grid = (0..=t_count)
        .into_par_iter()
        .map(|i| spec.eta_hat_direct(i as f64 * config.t_step))
        .collect();
    Ok(spec)
}

impl BumpSpec {
    pub fn config(&self) -> &BumpConfig {
        &self.config
    }

    /// `(η₀ * η₀)(0)`.
    pub fn normalization(&self) -> f64 {
        self.conv0
    }

    pub fn t_max(&self) -> f64 {
        self.config.t_max
    }

    fn eta_direct(&self, u: f64) -> f64 {
        let u = u.abs();
        if u >= 1.0 {
            return 0.0;
        }
        let b = self.config.base;
        simpson(u - 0.5, 0.5, self.config.conv_panels, |v| {
            b.value(v) * b.value(u - v)
        }) / self.conv0
    }

    fn eta_prime_direct(&self, u: f64) -> f64 {
        let a = u.abs();
        if a >= 1.0 {
            return 0.0;
        }
        let b = self.config.base;
        let d = simpson(a - 0.5, 0.5, self.config.conv_panels, |v| {
            b.value(v) * b.derivative(a - v)
        }) / self.conv0;
        if u < 0.0 {
            -d
        } else {
            d
        }
    }

    fn eta_hat_direct(&self, t: f64) -> f64 {
        let ys: Vec<f64> = self
            .base_grid
            .iter()
            .enumerate()
            .map(|(i, &e)| e * (t * i as f64 * self.base_h).cos())
            .collect();
        let f = 2.0 * simpson_samples(&ys, self.base_h);
        f * f / (2.0 * PI * self.conv0)
    }

    /// `η(u)`, by quadrature of the convolution integral.
    pub fn eta(&self, u: f64) -> f64 {
        self.eta_direct(u)
    }

    /// `η′(u)`, differentiating under the convolution integral.
    pub fn eta_prime(&self, u: f64) -> f64 {
        self.eta_prime_direct(u)
    }

    pub fn eta_tilde(&self, u: f64) -> f64 {
        (-u).exp() * self.eta(u)
    }

    pub fn eta_tilde_prime(&self, u: f64) -> f64 {
        (-u).exp() * (self.eta_prime(u) - self.eta(u))
    }

    pub fn eta_hat(&self, t: f64) -> Result<f64> {
        if !(t.abs() <= self.config.t_max) {
            return Err(Error::OutOfRange(format!(
                "|t| = {} exceeds t_max = {}",
                t.abs(),
                self.config.t_max
            )));
        }
        Ok(self.eta_hat_direct(t))
    }

    /// Cached `(t, η̂(t))` for `t = 0, t_step, …, t_max`.
    pub fn eta_hat_samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eta_hat_grid
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64 * self.config.t_step, v))
    }

    /// Cached `(u, η(u), η′(u))` for `u = 0, …, 1`.
    pub fn eta_samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.eta_grid.len()).map(|i| {
            (
                i as f64 * self.u_h,
                self.eta_grid[i],
                self.eta_prime_grid[i],
            )
        })
    }

    /// `∫_{−t_max}^{t_max} η̂(t) e^{−itu} dt`, which reproduces `η(u)`.
    pub fn fourier_inversion(&self, u: f64) -> f64 {
        let h = self.config.t_step;
        let ys: Vec<f64> = self
            .eta_hat_samples()
            .map(|(t, v)| v * (t * u).cos())
            .collect();
        2.0 * simpson_samples(&ys, h)
    }

    /// `∫ η̂(t) e^{−(1+it)u} dt`, which reproduces `η̃(u)`.
    pub fn twisted_inversion(&self, u: f64) -> f64 {
        (-u).exp() * self.fourier_inversion(u)
    }
}

pub fn eta(u: f64, spec: &BumpSpec) -> f64 {
    spec.eta(u)
}

pub fn eta_tilde(u: f64, spec: &BumpSpec) -> f64 {
    spec.eta_tilde(u)
}

pub fn eta_hat(t: f64, spec: &BumpSpec) -> Result<f64> {
    spec.eta_hat(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub abs_eta_hat: f64,
    pub scaled: f64,
}

/// `|η̂(t)|` against `exp(−c√t)` with `c` fitted to the local maxima of
/// `|η̂|` on `[1, t_max]`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub c_fit: f64,
    pub sup_scaled: f64,
    pub rows: Vec<DecayRow>,
}

pub fn decay_profile(spec: &BumpSpec) -> DecayProfile {
    let samples: Vec<(f64, f64)> = spec.eta_hat_samples().map(|(t, v)| (t, v.abs())).collect();
    let mut pts = Vec::new();
    for w in samples.windows(3) {
        let (t, v) = w[1];
        if t >= 1.0 && v > 0.0 && v >= w[0].1 && v >= w[2].1 {
            pts.push((t.sqrt(), v.ln()));
        }
    }
    let c_fit = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        -sxy / sxx
    } else {
        0.0
    };
    let rows: Vec<DecayRow> = samples
        .iter()
        .map(|&(t, v)| DecayRow {
            t,
            abs_eta_hat: v,
            scaled: v * (c_fit * t.sqrt()).exp(),
        })
        .collect();
    let sup_scaled = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    DecayProfile {
        c_fit,
        sup_scaled,
        rows,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct C0Result {
    pub c0_time: f64,
    pub c0_freq: f64,
    pub err_time: f64,
    pub err_freq: f64,
    /// Smallest value of the frequency-domain integrand on the grid.
    pub min_integrand: f64,
}

impl C0Result {
    pub fn relative_gap(&self) -> f64 {
        (self.c0_time - self.c0_freq).abs() / self.c0_time.abs()
    }
}

const C0_CONVERGENCE: f64 = 1e-4;

/// `c₀` from `∫₀¹ η̃′(u)² du` and from
/// `∫∫ (2 + t² + t′²)/(4 + (t + t′)²) η̂(t) η̂(t′) dt dt′`, the real part of
/// `(1+it)(1+it′)/(2+i(t+t′))`.
pub fn c0_compute(spec: &BumpSpec) -> Result<C0Result> {
    let ys: Vec<f64> = spec
        .eta_samples()
        .map(|(u, e, ep)| {
            let d = (-u).exp() * (ep - e);
            d * d
        })
        .collect();
    let (c0_time, rich_time) = simpson_richardson(&ys, spec.u_h);

    let n = spec.t_count;
    let h = spec.config.t_step;
    let m = 2 * n;
    let ts: Vec<f64> = (0..=m).map(|i| (i as f64 - n as f64) * h).collect();
    let hat: Vec<f64> = (0..=m).map(|i| spec.eta_hat_grid[i.abs_diff(n)]).collect();
    let rows: Vec<(f64, f64, f64)> = (0..=m)
        .into_par_iter()
        .map(|i| {
            let (ti, hi) = (ts[i], hat[i]);
            let mut fine = 0.0;
            let mut coarse = 0.0;
            let mut lo = f64::INFINITY;
            for j in 0..=m {
                let s = ti + ts[j];
                let g = (2.0 + ti * ti + ts[j] * ts[j]) / (4.0 + s * s) * hi * hat[j];
                lo = lo.min(g);
                fine += simpson_weight(j, m) * g;
                if i % 2 == 0 && j % 2 == 0 {
                    coarse += simpson_weight(j / 2, m / 2) * g;
                }
            }
            let wi = simpson_weight(i, m);
            let wc = if i % 2 == 0 {
                simpson_weight(i / 2, m / 2)
            } else {
                0.0
            };
            (wi * fine, wc * coarse, lo)
        })
        .collect();
    let fine: f64 = rows.iter().map(|r| r.0).sum::<f64>() * (h / 3.0) * (h / 3.0);
    let coarse: f64 = rows.iter().map(|r| r.1).sum::<f64>() * (2.0 * h / 3.0) * (2.0 * h / 3.0);
    let min_integrand = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let t_max = spec.config.t_max;
    let tail = spec.eta_hat_grid[n] * (1.0 + t_max * t_max);
    let floor = 1e-12 * fine.abs();
    let result = C0Result {
        c0_time,
        c0_freq: fine,
        err_time: rich_time + 1e-12 * c0_time.abs(),
        err_freq: (fine - coarse).abs() / 15.0 + tail + floor,
        min_integrand,
    };
    if !(result.c0_time.is_finite() && result.c0_freq.is_finite())
        || result.err_time > C0_CONVERGENCE * result.c0_time.abs()
        || result.err_freq > C0_CONVERGENCE * result.c0_freq.abs()
    {
        return Err(Error::NumericFailure(format!(
            "c0 quadrature did not converge: time {} ± {}, frequency {} ± {}",
            result.c0_time, result.err_time, result.c0_freq, result.err_freq
        )));
    }
    Ok(result)
}

/// `eta_profile.csv`: `u, eta, eta_tilde, eta_tilde_prime` on `[−1, 1]`.
pub fn write_eta_profile<W: Write>(spec: &BumpSpec, mut out: W) -> Result<()> {
    csv_row(&mut out, &["u", "eta", "eta_tilde", "eta_tilde_prime"])?;
    let samples: Vec<(f64, f64, f64)> = spec.eta_samples().collect();
    let rows = samples
        .iter()
        .rev()
        .map(|&(u, e, ep)| (-u, e, -ep))
        .chain(samples.iter().skip(1).copied());
    for (u, e, ep) in rows {
        let twist = (-u).exp();
        csv_row(
            &mut out,
            &[real(u), real(e), real(twist * e), real(twist * (ep - e))],
        )?;
    }
    Ok(())
}

/// `eta_hat_profile.csv`: `t, eta_hat` on `[−t_max, t_max]`.
pub fn write_eta_hat_profile<W: Write>(spec: &BumpSpec, mut out: W) -> Result<()> {
    csv_row(&mut out, &["t", "eta_hat"])?;
    let samples: Vec<(f64, f64)> = spec.eta_hat_samples().collect();
    let rows = samples
        .iter()
        .rev()
        .map(|&(t, v)| (-t, v))
        .chain(samples.iter().skip(1).copied());
    for (t, v) in rows {
        csv_row(&mut out, &[real(t), real(v)])?;
    }
    Ok(())
}
