//! Order-stable parallel summation.

use rayon::prelude::*;

const CHUNK: usize = 4096;

/// `Σ_{i<n} f(i)`: fixed-size chunks summed left to right, then combined
/// pairwise. The result does not depend on the thread count.
pub(crate) fn ordered_sum<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    let chunks: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).sum())
        .collect();
    pairwise(&chunks)
}

fn pairwise(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise(&v[..n / 2]) + pairwise(&v[n / 2..]),
    }
}
