use roughn_core::bump::{c0_compute, decay_profile, make_bump, BumpConfig, BumpSpec};
use std::f64::consts::PI;
use std::sync::OnceLock;

fn spec() -> &'static BumpSpec {
    static S: OnceLock<BumpSpec> = OnceLock::new();
    S.get_or_init(|| make_bump(BumpConfig::default()).unwrap())
}

fn base(u: f64) -> f64 {
    if u.abs() >= 0.5 {
        0.0
    } else {
        (-1.0 / (1.0 - 4.0 * u * u)).exp()
    }
}

// plain composite Simpson with step close to h
fn simpson_h(a: f64, b: f64, h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut n = ((b - a) / h).ceil() as usize;
    n += n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn conv_oracle(u: f64, h: f64) -> f64 {
    let u = u.abs();
    if u >= 1.0 {
        return 0.0;
    }
    let c = simpson_h(u - 0.5, 0.5, h, |v| base(v) * base(u - v));
    let c0 = simpson_h(-0.5, 0.5, h, |v| base(v) * base(v));
    c / c0
}

/// Filon–Simpson rule for `∫_a^b f(x) cos(tx) dx` on 2n panels.
fn filon_cos(a: f64, b: f64, n2: usize, t: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n2 as f64;
    let th = t * h;
    let (s, c) = th.sin_cos();
    let th2 = th * th;
    let alpha = (th2 + th * s * c - 2.0 * s * s) / (th2 * th);
    let beta = 2.0 * (th * (1.0 + c * c) - 2.0 * s * c) / (th2 * th);
    let gamma = 4.0 * (s - th * c) / (th2 * th);
    let x = |i: usize| a + i as f64 * h;
    let c_even: f64 = (0..=n2)
        .step_by(2)
        .map(|i| {
            let w = if i == 0 || i == n2 { 0.5 } else { 1.0 };
            w * f(x(i)) * (t * x(i)).cos()
        })
        .sum();
    let c_odd: f64 = (1..n2).step_by(2).map(|i| f(x(i)) * (t * x(i)).cos()).sum();
    h * (alpha * (f(b) * (t * b).sin() - f(a) * (t * a).sin()) + beta * c_even + gamma * c_odd)
}

#[test]
fn eta_at_point_three_matches_fine_convolution() {
    let oracle = conv_oracle(0.3, 1e-5);
    assert!(
        (spec().eta(0.3) - oracle).abs() < 1e-10,
        "{} vs {oracle}",
        spec().eta(0.3)
    );
}

#[test]
fn eta_tilde_at_half() {
    let oracle = (-0.5f64).exp() * conv_oracle(0.5, 1e-5);
    assert!((spec().eta_tilde(0.5) - oracle).abs() < 1e-10);
}

#[test]
fn eta_prime_matches_central_difference() {
    for u in [0.1, 0.35, 0.62, -0.4] {
        let h = 1e-4;
        let fd = (conv_oracle(u + h, 2e-4) - conv_oracle(u - h, 2e-4)) / (2.0 * h);
        assert!((spec().eta_prime(u) - fd).abs() < 1e-6, "u = {u}");
    }
}

#[test]
fn eta_hat_at_ten_matches_filon_on_eta() {
    // η̂(10) = (1/π) ∫_0^1 η(u) cos(10u) du, with η from direct convolution
    let n2 = 4000;
    let etas: Vec<f64> = (0..=n2)
        .map(|i| conv_oracle(i as f64 / n2 as f64, 2.5e-4))
        .collect();
    let f = |x: f64| etas[(x * n2 as f64).round() as usize];
    let oracle = filon_cos(0.0, 1.0, n2, 10.0, f) / PI;
    let got = spec().eta_hat(10.0).unwrap();
    assert!((got - oracle).abs() < 1e-11, "{got} vs {oracle}");
}

#[test]
fn eta_hat_integrates_to_one() {
    let total = spec().fourier_inversion(0.0);
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn fourier_and_twisted_inversion() {
    let s = spec();
    let mut u = -0.97;
    while u < 1.0 {
        assert!((s.fourier_inversion(u) - s.eta(u)).abs() <= 1e-6, "u = {u}");
        assert!(
            (s.twisted_inversion(u) - s.eta_tilde(u)).abs() <= 1e-6,
            "u = {u}"
        );
        u += 0.0973;
    }
}

#[test]
fn eta_hat_nonnegative_and_even() {
    let s = spec();
    assert!(s.eta_hat_samples().all(|(_, v)| v >= -1e-10));
    for t in [0.3, 3.7, 17.25, 150.0] {
        assert_eq!(s.eta_hat(t).unwrap(), s.eta_hat(-t).unwrap());
    }
}

#[test]
fn decay_profile_rows() {
    let s = spec();
    let p = decay_profile(s);
    assert!(p.c_fit > 0.0 && p.sup_scaled.is_finite());
    let first = &p.rows[0];
    assert_eq!(first.t, 0.0);
    // |η̂(0)| = (1/2π) ∫ η
    let integral = 2.0 * simpson_h(0.0, 1.0, 1e-3, |u| conv_oracle(u, 1e-3));
    assert!((first.abs_eta_hat - integral / (2.0 * PI)).abs() < 1e-10);
    let envelope = p
        .rows
        .iter()
        .filter(|r| r.t >= 1.0)
        .map(|r| r.scaled)
        .fold(0.0, f64::max);
    assert!(envelope.is_finite() && envelope < 1e3);
}

#[test]
fn doubling_resolution_changes_eta_hat_little() {
    let fine = make_bump(BumpConfig {
        conv_panels: 4000,
        ..BumpConfig::default()
    })
    .unwrap();
    let s = spec();
    let worst = s
        .eta_hat_samples()
        .zip(fine.eta_hat_samples())
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn c0_routes_agree_and_exceed_one() {
    let r = c0_compute(spec()).unwrap();
    assert!(r.c0_time >= 1.0 - 1e-9);
    assert!(r.relative_gap() <= 1e-6, "{r:?}");
    assert!(
        (r.c0_time - r.c0_freq).abs() <= r.err_time + r.err_freq,
        "{r:?}"
    );
    assert!(r.min_integrand >= 0.0);
}
