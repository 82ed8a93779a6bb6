//! Composite Simpson quadrature on uniform grids.

/// Simpson sum of equally spaced samples `ys` (odd length) with spacing `h`.
pub(crate) fn simpson_samples(ys: &[f64], h: f64) -> f64 {
    let n = ys.len();
    debug_assert!(
        n >= 3 && n % 2 == 1,
        "Simpson needs an odd number of samples"
    );
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &y) in ys.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += y;
        } else {
            even += y;
        }
    }
    h / 3.0 * (ys[0] + ys[n - 1] + 4.0 * odd + 2.0 * even)
}

/// Simpson weight for node `i` of a grid with `n` panels (n even).
pub(crate) fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// `∫_a^b f` with `panels` Simpson panels (rounded up to even).
pub(crate) fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        acc += simpson_weight(i, n) * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson values at `h` and `2h` on the same samples, with the Richardson
/// estimate `|S(h) − S(2h)| / 15`. Needs `ys.len() ≡ 1 (mod 4)`.
pub(crate) fn simpson_richardson(ys: &[f64], h: f64) -> (f64, f64) {
    let fine = simpson_samples(ys, h);
    let coarse: Vec<f64> = ys.iter().step_by(2).copied().collect();
    let rough = simpson_samples(&coarse, 2.0 * h);
    (fine, (fine - rough).abs() / 15.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_cubics_exactly() {
        let v = simpson(0.0, 2.0, 4, |x| x * x * x - x + 1.0);
        assert!((v - 4.0).abs() < 1e-14);
    }

    #[test]
    fn richardson_estimate_is_small_for_smooth_data() {
        let n = 401;
        let h = std::f64::consts::PI / (n - 1) as f64;
        let ys: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        let (v, e) = simpson_richardson(&ys, h);
        assert!((v - 2.0).abs() < 1e-10);
        assert!(e < 1e-9 && e >= (v - 2.0).abs() * 0.1);
    }
}
