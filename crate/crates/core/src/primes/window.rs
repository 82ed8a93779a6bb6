use rayon::prelude::*;

use super::{Factorization, PrimeTable};
use crate::error::{invalid, Error, Result};

const SEGMENT: u64 = 1 << 16;

/// Complete factorizations of every integer in `[lo, hi]`, stored as one flat
/// factor list with per-integer offsets.
#[derive(Debug, Clone)]
pub struct WindowFactors {
    lo: u64,
    hi: u64,
    offsets: Vec<usize>,
    factors: Vec<(u64, u32)>,
}

/// Factors `[lo, hi]` by sieving with the primes up to `√hi`.
///
/// Segments are processed in parallel and concatenated in index order, so the
/// result does not depend on the thread count.
pub fn factor_window(lo: u64, hi: u64, table: &PrimeTable) -> Result<WindowFactors> {
    if lo < 2 || lo > hi {
        return Err(invalid(format!(
            "window [{lo}, {hi}] must satisfy 2 <= lo <= hi"
        )));
    }
    if !table.covers_sqrt(hi) {
        return Err(Error::TableTooSmall {
            needed: hi.isqrt(),
            limit: table.limit(),
        });
    }
    let root = hi.isqrt();
    let sieving = table.primes_in(0, root);
    let segments: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut s = lo;
        loop {
            let e = s.saturating_add(SEGMENT - 1).min(hi);
            v.push((s, e));
            if e == hi {
                break;
            }
            s = e + 1;
        }
        v
    };
    let parts: Vec<(Vec<usize>, Vec<(u64, u32)>)> = segments
        .par_iter()
        .map(|&(s, e)| factor_segment(s, e, sieving))
        .collect();

    let total_factors = parts.iter().map(|p| p.1.len()).sum();
    let mut offsets = Vec::with_capacity((hi - lo + 2) as usize);
    let mut factors = Vec::with_capacity(total_factors);
    offsets.push(0);
    for (seg_offsets, seg_factors) in parts {
        let base = factors.len();
        offsets.extend(seg_offsets.iter().skip(1).map(|o| o + base));
        factors.extend(seg_factors);
    }
    Ok(WindowFactors {
        lo,
        hi,
        offsets,
        factors,
    })
}

fn factor_segment(s: u64, e: u64, primes: &[u64]) -> (Vec<usize>, Vec<(u64, u32)>) {
    let len = (e - s + 1) as usize;
    let mut rem: Vec<u64> = (s..=e).collect();
    // (index, prime, exponent) in increasing prime order
    let mut events: Vec<(u32, u64, u32)> = Vec::new();
    for &p in primes {
        let first = s.div_ceil(p) * p;
        let mut m = first;
        while m <= e {
            let i = (m - s) as usize;
            let mut r = rem[i];
            let mut k = 0;
            while r.is_multiple_of(p) {
                r /= p;
                k += 1;
            }
            rem[i] = r;
            events.push((i as u32, p, k));
            m += p;
        }
    }
    for (i, &r) in rem.iter().enumerate() {
        if r > 1 {
            events.push((i as u32, r, 1));
        }
    }
    // stable counting sort by index keeps primes ascending within each integer
    let mut offsets = vec![0usize; len + 1];
    for &(i, _, _) in &events {
        offsets[i as usize + 1] += 1;
    }
    for i in 0..len {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut factors = vec![(0u64, 0u32); events.len()];
    for (i, p, k) in events {
        let slot = &mut cursor[i as usize];
        factors[*slot] = (p, k);
        *slot += 1;
    }
    (offsets, factors)
}

impl WindowFactors {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.lo..=self.hi).contains(&n)
    }

    /// Prime/exponent pairs of `n`. Panics when `n` is outside the window.
    pub fn factors_of(&self, n: u64) -> &[(u64, u32)] {
        assert!(
            self.contains(n),
            "{n} outside window [{}, {}]",
            self.lo,
            self.hi
        );
        let i = (n - self.lo) as usize;
        &self.factors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn get(&self, n: u64) -> Option<&[(u64, u32)]> {
        self.contains(n).then(|| self.factors_of(n))
    }

    pub fn factorization(&self, n: u64) -> Factorization {
        Factorization {
            n,
            factors: self.factors_of(n).to_vec(),
        }
    }

    pub fn omega(&self, n: u64) -> u32 {
        self.factors_of(n).len() as u32
    }

    pub fn big_omega(&self, n: u64) -> u32 {
        self.factors_of(n).iter().map(|&(_, e)| e).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::{build_prime_table, factorize};

    #[test]
    fn small_window_matches_pointwise() {
        let t = build_prime_table(100).unwrap();
        let w = factor_window(10, 20, &t).unwrap();
        assert_eq!(w.len(), 11);
        for n in 10..=20 {
            assert_eq!(w.factorization(n), factorize(n, &t).unwrap());
        }
    }

    #[test]
    fn single_point_window() {
        let t = build_prime_table(10).unwrap();
        let w = factor_window(2, 2, &t).unwrap();
        assert_eq!(w.factors_of(2), &[(2, 1)]);
    }

    #[test]
    fn rejects_bad_windows() {
        let t = build_prime_table(10).unwrap();
        assert!(factor_window(1, 5, &t).is_err());
        assert!(factor_window(9, 5, &t).is_err());
        assert!(matches!(
            factor_window(100, 200, &t),
            Err(Error::TableTooSmall { .. })
        ));
    }

    #[test]
    fn spans_several_segments() {
        let t = build_prime_table(1000).unwrap();
        let lo = 300_000;
        let hi = lo + 3 * SEGMENT + 17;
        let w = factor_window(lo, hi, &t).unwrap();
        for n in (lo..=hi)
            .step_by(97)
            .chain([lo, hi, lo + SEGMENT - 1, lo + SEGMENT])
        {
            assert_eq!(w.factorization(n), factorize(n, &t).unwrap(), "n = {n}");
        }
    }
}
