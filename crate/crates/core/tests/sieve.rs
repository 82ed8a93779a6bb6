use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughn_core::bump::{make_bump, BumpConfig, BumpSpec};
use roughn_core::primes::{build_prime_table, factorize_trial};
use roughn_core::sieve::*;
use roughn_core::Error;

fn spec() -> &'static BumpSpec {
    static S: OnceLock<BumpSpec> = OnceLock::new();
    S.get_or_init(|| make_bump(BumpConfig::default()).unwrap())
}

/// `x = 10⁵` version of the toy regime: `W = 30`, `R₁ = 10`, `R₂ = 5`.
fn small_params() -> SieveParams {
    SieveParams {
        x: 100_000,
        ..SieveParams::toy()
    }
}

fn small_table() -> &'static WeightTable {
    static T: OnceLock<WeightTable> = OnceLock::new();
    T.get_or_init(|| build_weight_table(&small_params(), spec()).unwrap())
}

fn base(u: f64) -> f64 {
    if u.abs() >= 0.5 {
        0.0
    } else {
        (-1.0 / (1.0 - 4.0 * u * u)).exp()
    }
}

// η̃ by direct Simpson convolution, independent of the library
fn eta_tilde_oracle(u: f64) -> f64 {
    let simpson = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let c = simpson(u - 0.5, 0.5, &|v| base(v) * base(u - v));
    let c0 = simpson(-0.5, 0.5, &|v| base(v) * base(v));
    (-u).exp() * c / c0
}

fn toy_k1_r10(x: u64) -> SieveParams {
    SieveParams {
        x,
        big_k: 1,
        w: 2,
        a: 1,
        custom_levels: Some(vec![10.0]),
        k_max: 10,
        ..SieveParams::default()
    }
}

#[test]
fn nu_with_only_the_trivial_divisor() {
    let p = toy_k1_r10(10_000);
    // n + 1 prime > 10 and n even
    for n in [10_006u64, 10_008, 10_038] {
        assert!(factorize_trial(n + 1).unwrap().factors.len() == 1);
        assert_eq!(nu_exact(n, &p, spec()).unwrap(), 1.0);
    }
    assert_eq!(nu_exact(10_001, &p, spec()).unwrap(), 0.0);
}

#[test]
fn nu_with_a_factor_three() {
    let p = toy_k1_r10(10_000);
    // 10_010 + 1 = 3 · 47 · 71
    let n = 10_010;
    assert_eq!(
        factorize_trial(n + 1).unwrap().factors,
        vec![(3, 1), (47, 1), (71, 1)]
    );
    let want = (1.0 - eta_tilde_oracle(3f64.ln() / 10f64.ln())).powi(2);
    assert!((nu_exact(n, &p, spec()).unwrap() - want).abs() < 1e-12);
}

#[test]
fn nu_rejects_n_outside_window() {
    let p = toy_k1_r10(10_000);
    assert!(matches!(
        nu_exact(9_998, &p, spec()),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        nu_exact(20_002, &p, spec()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn support_is_the_multiples_of_w() {
    let p = SieveParams {
        x: 10_000,
        big_k: 1,
        w: 3,
        a: 1,
        c: 0.2,
        k_max: 10,
        ..SieveParams::default()
    };
    let t = build_weight_table(&p, spec()).unwrap();
    assert_eq!(t.w_modulus(), 6);
    let want: Vec<u64> = (10_000..=20_000).filter(|n| n % 6 == 0).collect();
    let got: Vec<u64> = t.entries().map(|(n, _)| n).collect();
    assert_eq!(got, want);
    // total is the direct sum of nu_exact over the whole window
    let direct: f64 = (10_000..=20_000u64)
        .map(|n| nu_exact(n, &p, spec()).unwrap())
        .sum();
    assert!((t.total() - direct).abs() <= 1e-10 * direct);
    for (n, v) in t.entries() {
        assert_eq!(v, nu_exact(n, &p, spec()).unwrap(), "n = {n}");
    }
}

#[test]
fn degenerate_schedule_is_uniform_on_even_n() {
    let p = SieveParams {
        x: 10_000,
        big_k: 1,
        w: 2,
        a: 1,
        custom_levels: Some(vec![2.0]),
        k_max: 5,
        ..SieveParams::default()
    };
    let t = build_weight_table(&p, spec()).unwrap();
    assert_eq!(t.len(), 5001);
    assert!(t.weights().iter().all(|&v| v == 1.0));
    assert_eq!(t.total(), 5001.0);
}

#[test]
fn total_matches_resummation_in_other_orders() {
    let t = small_table();
    let rev: f64 = t.weights().iter().rev().sum();
    fn pairwise(v: &[f64]) -> f64 {
        if v.len() <= 8 {
            v.iter().sum()
        } else {
            let (a, b) = v.split_at(v.len() / 2);
            pairwise(a) + pairwise(b)
        }
    }
    assert!((t.total() - rev).abs() <= 1e-10 * t.total());
    assert!((t.total() - pairwise(t.weights())).abs() <= 1e-10 * t.total());
    let norm: f64 = t.weights().iter().map(|v| v / t.total()).sum();
    assert!((norm - 1.0).abs() <= 1e-12);
}

#[test]
fn empty_support_and_infeasible_params() {
    let p = SieveParams {
        x: 40,
        big_k: 1,
        w: 7,
        a: 1,
        custom_levels: Some(vec![7.0]),
        k_max: 1,
        ..SieveParams::default()
    };
    assert!(matches!(
        build_weight_table(&p, spec()),
        Err(Error::InvalidArgument(_)) | Err(Error::EmptySupport(_))
    ));
    let p = SieveParams {
        x: 100,
        big_k: 1,
        w: 5,
        a: 1,
        custom_levels: Some(vec![5.0]),
        k_max: 1,
        ..SieveParams::default()
    };
    // W = 30 is not feasible at x = 100 once R₁² is counted
    assert!(build_weight_table(&p, spec()).is_err());
    let p = SieveParams {
        x: 10_000_000,
        big_k: 4,
        w: 7,
        c: 0.1,
        gamma: 3.0,
        ..SieveParams::default()
    };
    assert!(matches!(
        build_weight_table(&p, spec()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn prob_divides_edge_cases_and_brute_force() {
    let t = small_table();
    let p = small_params();
    assert_eq!(prob_divides(1, 1, t), 1.0);
    assert_eq!(prob_divides(1, 37, t), 1.0);
    assert_eq!(prob_divides(3, 1, t), 0.0);
    assert_eq!(prob_divides(5, 2, t), 0.0);
    // weighted count by direct enumeration of the window
    let mut hit = 0.0;
    let mut all = 0.0;
    for n in p.x..=2 * p.x {
        let v = nu_exact(n, &p, spec()).unwrap();
        all += v;
        if (n + 1) % 11 == 0 {
            hit += v;
        }
    }
    let got = prob_divides(11, 1, t);
    assert!((got - hit / all).abs() <= 1e-12, "{got} vs {}", hit / all);
    assert!((0.0..=1.0).contains(&got));
}

#[test]
fn tiny_prime_rigidity_is_exact() {
    let t = small_table();
    let p = small_params();
    for q in build_prime_table(p.w).unwrap().primes() {
        for k in 1..=p.k_max {
            let want = if k % q == 0 { 1.0 } else { 0.0 };
            assert_eq!(prob_divides(*q, k, t), want, "p = {q}, k = {k}");
        }
    }
}

#[test]
fn pruned_inner_sum_equals_full_divisor_sum() {
    let p = small_params();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.gen_range(p.x..=2 * p.x);
        for k in 1..=p.big_k as u64 {
            let m = n + k;
            let r = p.level(k);
            // every divisor, weight μ(d)·𝟙_{(d,P(w))=1}·η̃(log d / log R) with η̃ = 0 past 1
            let mut full = 0.0;
            let mut divisors: Vec<u64> = (1..=m)
                .take_while(|d| d * d <= m)
                .filter(|d| m % d == 0)
                .flat_map(|d| [d, m / d])
                .collect();
            divisors.sort_unstable();
            divisors.dedup();
            for d in divisors {
                let f = factorize_trial(d).unwrap();
                if f.factors.iter().any(|&(q, _)| q <= p.w) {
                    continue;
                }
                let u = (d as f64).ln() / r.ln();
                full += f.mobius() as f64 * spec().eta_tilde(u);
            }
            let pruned = inner_sum(m, r, p.w, spec()).unwrap();
            assert!((full - pruned).abs() < 1e-14, "n = {n}, k = {k}");
        }
    }
}

#[test]
fn samples_live_on_the_support_and_are_reproducible() {
    let t = small_table();
    let a = sample(t, 42, 100_000).unwrap();
    let b = sample(t, 42, 100_000).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|n| n % 30 == 0 && t.nu(*n) > 0.0));
    assert_ne!(a, sample(t, 43, 100_000).unwrap());
    let rows = divisibility_rows(t, &a, &[(11, 1)]);
    assert!(rows[0].within(3.0), "{:?}", rows[0]);
    // worker count does not matter
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let c = pool.install(|| sample(t, 42, 100_000).unwrap());
    assert_eq!(a, c);
    assert!(sample(t, 1, 0).is_err());
}

#[test]
fn sample_prefix_is_stable() {
    let t = small_table();
    let long = sample(t, 9, 10_000).unwrap();
    let short = sample(t, 9, 5_000).unwrap();
    assert_eq!(&long[..5_000], short.as_slice());
}

#[test]
fn euler_product_examples() {
    let p = SieveParams::toy();
    let table = build_prime_table(200_000).unwrap();
    let zero = vec![0.0; p.big_k];
    let empty = euler_product_f(&zero, &zero, 1, 3, &p, p.w, &table).unwrap();
    assert_eq!(empty.value, Complex64::new(1.0, 0.0));
    let mut prev = 1.0;
    for cutoff in [10u64, 100, 1_000, 10_000, 100_000] {
        let f = euler_product_f(&zero, &zero, 1, 3, &p, cutoff, &table).unwrap();
        assert!(f.value.re > 0.0 && f.value.re < prev && f.value.im.abs() < 1e-15);
        assert!(f.relative_delta < 1.0);
        prev = f.value.re;
    }
    // single-prime d*: F = E_p · ∏_{p′ ≠ p} E_{p′}
    let t = vec![0.7, -1.3];
    let tp = vec![2.1, 0.4];
    let with = euler_product_f(&t, &tp, 13, 14, &p, 1000, &table)
        .unwrap()
        .value;
    let without = euler_product_f(&t, &tp, 1, 14, &p, 1000, &table)
        .unwrap()
        .value;
    let q = |d: u64, prime: u64| LocalFactorQuery {
        k_star: 14,
        d_star: d,
        p: prime,
        t: t.clone(),
        t_prime: tp.clone(),
    };
    let e13 = local_factor_e(&q(13, 13), &p).unwrap();
    let e13_coprime = local_factor_e(&q(1, 13), &p).unwrap();
    let expect = without / e13_coprime * e13;
    assert!((with - expect).norm() <= 1e-12 * with.norm());
    assert!(matches!(
        euler_product_f(&zero, &zero, 1, 3, &p, 150_000, &table),
        Err(Error::TableTooSmall { .. })
    ));
}

#[test]
fn axiom_a_and_b_edge() {
    let t = small_table();
    let a = axiom_check(Axiom::A, t, 1, 10).unwrap();
    assert_eq!(a.passed, Some(true));
    assert_eq!(a.statistic, 1.0);
    let b = axiom_check(Axiom::B, t, 2, 20_000).unwrap();
    assert_eq!(b.rows[0].d, 1);
    assert_eq!(b.rows[0].value, 1.0);
    assert!(b.statistic.is_finite());
}

#[test]
fn axiom_c_reports_a_constant() {
    let r = axiom_check(Axiom::C, small_table(), 3, 100_000).unwrap();
    assert!(!r.budget_exhausted);
    assert!(r.fitted_constant.unwrap() > 0.0);
    // R₁ = 10 leaves only p = 7 for k = 1, so the single-prime sum is ℙ(7 | n + 1)
    let row = r.rows.iter().find(|row| row.k == 1 && row.j == 1).unwrap();
    assert!((row.value - prob_divides(7, 1, small_table())).abs() < 1e-15);
}

#[test]
fn axiom_d_matches_two_enumerations() {
    let t = small_table();
    let p = small_params();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut all = 0.0;
    for n in p.x..=2 * p.x {
        let v = nu_exact(n, &p, spec()).unwrap();
        all += v;
        if (n + 1) % 121 == 0 {
            num += v;
        }
        if (n + 1) % 11 == 0 {
            den += v;
        }
    }
    let brute = num / all - den / all / 11.0;
    let got = axiom_d_deviation(t, &[(11, 2)], 1).unwrap();
    assert!((got - brute).abs() < 1e-12, "{got} vs {brute}");
    let r = axiom_check(Axiom::D, t, 2, 50_000).unwrap();
    assert!(r.statistic < 1e-2);
}

#[test]
fn exact_mode_agrees_with_floats() {
    let p = SieveParams {
        x: 9_000,
        big_k: 1,
        w: 2,
        a: 1,
        custom_levels: Some(vec![30.0]),
        k_max: 6,
        ..SieveParams::default()
    };
    let exact = build_exact_weight_table(&p, spec()).unwrap();
    let float = build_weight_table(&p, spec()).unwrap();
    assert_eq!(exact.len(), float.len());
    for (d, k) in [
        (1, 1),
        (3, 1),
        (5, 2),
        (7, 3),
        (11, 1),
        (2, 2),
        (2, 1),
        (9, 1),
    ] {
        let e = rational_to_f64(&exact.prob_divides(d, k));
        let f = prob_divides(d, k, &float);
        assert!((e - f).abs() < 1e-9, "d = {d}, k = {k}: {e} vs {f}");
    }
    assert!(exact.prob_divides(2, 1).is_zero());
    assert!(exact.prob_divides(2, 4).is_one());
    let dev = exact.power_deviation(&[(2, 2)], 2).unwrap();
    let fdev = axiom_d_deviation(&float, &[(2, 2)], 2).unwrap();
    assert!((rational_to_f64(&dev) - fdev).abs() < 1e-9);
    let big = SieveParams { x: 20_000, ..p };
    assert!(matches!(
        build_exact_weight_table(&big, spec()),
        Err(Error::BudgetExceeded(_))
    ));
}

#[test]
fn csv_outputs() {
    let t = small_table();
    let mut buf = Vec::new();
    write_weights_csv(t, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,nu,cumulative_mass"));
    assert_eq!(text.lines().count(), 1 + t.len());
    assert!(text
        .lines()
        .last()
        .unwrap()
        .ends_with(",1.0000000000000000e0"));
    let samples = sample(t, 1, 1000).unwrap();
    let rows = divisibility_rows(t, &samples, &[(7, 1), (13, 3)]);
    let mut buf = Vec::new();
    write_probs_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .starts_with("d_star,k_star,exact_prob,mc_estimate,mc_sigma\n7,1,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn e_factor_bounded_when_p_divides(
        pi in 0usize..200,
        k_star in 1u64..500,
        t in prop::collection::vec(-50.0f64..50.0, 2),
        tp in prop::collection::vec(-50.0f64..50.0, 2),
    ) {
        static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
        let primes = PRIMES.get_or_init(|| build_prime_table(5_000).unwrap().primes().iter().copied().filter(|&p| p > 5).collect());
        let params = SieveParams::toy();
        let p = primes[pi];
        let q = LocalFactorQuery { k_star, d_star: p, p, t, t_prime: tp };
        let e = local_factor_e(&q, &params).unwrap();
        prop_assert!(e.norm() <= 4.0 / p as f64 + 1e-15);
    }

    #[test]
    fn k_star_p_matches_exhaustive_scan(p_idx in 0usize..50, k_star in 1u64..10_000, big_k in 1usize..8) {
        let primes: Vec<u64> = build_prime_table(400).unwrap().primes().iter().copied().filter(|&p| p > 7).collect();
        let p = primes[p_idx % primes.len()];
        let params = SieveParams { x: 1 << 40, big_k, w: 7, c: 0.01, k_max: 100, ..SieveParams::default() };
        let scan: Vec<u64> = (1..=big_k as u64).filter(|&k| (k as i64 - k_star as i64).rem_euclid(p as i64) == 0).collect();
        prop_assert!(scan.len() <= 1);
        prop_assert_eq!(uniqueness_of_k_star_p(p, k_star, &params).unwrap(), scan.first().copied());
    }
}
