use proptest::prelude::*;
use roughn_core::primes::{
    build_prime_table, factor_window, factorize, factorize_trial, mertens_partial_sum, PrimeTable,
};
use std::sync::OnceLock;

fn table() -> &'static PrimeTable {
    static T: OnceLock<PrimeTable> = OnceLock::new();
    T.get_or_init(|| build_prime_table(100_000).unwrap())
}

#[test]
fn every_n_up_to_1e5_reconstructs_and_matches_trial_division() {
    let t = table();
    for n in 1..=100_000u64 {
        let f = factorize(n, t).unwrap();
        assert_eq!(f.reconstruct(), Some(n));
        assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(f.factors.iter().all(|&(_, e)| e >= 1));
        assert_eq!(f, factorize_trial(n).unwrap());
        let tau: u64 = f.factors.iter().map(|&(_, e)| e as u64 + 1).product();
        assert_eq!(f.tau(), tau);
    }
}

#[test]
fn window_near_a_million_matches_trial_division() {
    let t = table();
    let w = factor_window(1_000_000, 1_001_000, t).unwrap();
    for n in 1_000_000..=1_001_000u64 {
        assert_eq!(
            w.big_omega(n),
            factorize_trial(n).unwrap().big_omega(),
            "n = {n}"
        );
    }
}

#[test]
fn mertens_band() {
    let t = build_prime_table(10_000_000).unwrap();
    let mut x = 1_000u64;
    while x <= 10_000_000 {
        let s = mertens_partial_sum(0.0, x as f64, &t).unwrap();
        let diff = s - (x as f64).ln().ln();
        assert!(diff.abs() < 1.0, "x = {x}, diff = {diff}");
        if x >= 100_000 {
            assert!((diff - 0.2615).abs() <= 0.05, "x = {x}, diff = {diff}");
        }
        x *= 10;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn window_equals_pointwise(lo in 2u64..5_000_000_000, len in 0u64..300) {
        let hi = lo + len;
        let t = table();
        let w = factor_window(lo, hi, t).unwrap();
        for n in lo..=hi {
            let f = factorize(n, t).unwrap();
            prop_assert_eq!(w.factors_of(n), f.factors.as_slice());
        }
    }

    #[test]
    fn omega_counts_are_consistent(n in 1u64..10_000_000_000) {
        let f = factorize(n, table()).unwrap();
        prop_assert_eq!(f.reconstruct(), Some(n));
        prop_assert_eq!(f.omega() as usize, f.factors.len());
        prop_assert_eq!(f.big_omega(), f.factors.iter().map(|&(_, e)| e).sum::<u32>());
        prop_assert_eq!(f.mobius() != 0, f.is_squarefree());
    }
}
