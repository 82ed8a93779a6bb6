//! The sieve-weighted measure on `[x, 2x]`.
//!
//! ```text
//! ν(n) = 𝟙_{W | n} ∏_{k=1}^{K} ( Σ_{d | n+k, (d, P(w)) = 1} μ(d) η̃(log d / log R_k) )²
//! ```
//!
//! with `P(w)` the primorial of `w`. Drawing `n` with probability
//! `ν(n) / Σ ν` gives the random variable whose divisibility statistics are
//! studied here: exact probabilities, Monte Carlo samples, the Euler-product
//! local factors, and the axioms (A) to (D).

mod axioms;
mod exact;
mod local;
mod params;
mod weights;

pub use axioms::{axiom_check, axiom_d_deviation, Axiom, AxiomReport, AxiomRow};
pub use exact::{
    build_exact_weight_table, rational_to_f64, to_dyadic, ExactWeightTable, DYADIC_BITS,
    MAX_EXACT_WINDOW,
};
pub use local::{
    euler_product_f, local_factor_e, uniqueness_of_k_star_p, EulerProduct, LocalFactorQuery,
};
pub use params::SieveParams;
pub use weights::{
    build_weight_table, divisibility_rows, inner_sum, nu_exact, prob_divides, sample,
    sieve_coefficients, write_probs_csv, write_weights_csv, write_weights_rows, ProbRow,
    WeightTable, MAX_SUPPORT, WEIGHTS_HEADER,
};
