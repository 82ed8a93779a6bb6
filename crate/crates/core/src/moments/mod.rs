//! Exact combinatorics behind the moment method, and exact moments, tails
//! and union bounds of prime-factor counts under a weight table.
//!
//! Moments are computed by full enumeration of the table's support. The
//! display bounds carried in reports use the configured constants and are
//! never asserted.

mod moment;
mod partitions;
mod simplex;
mod stirling;
mod union;

pub use moment::{
    chebyshev_tail, exact_centered_moment, exact_tail, fit_c3, write_moments_csv, MomentReport,
    PrimeRange, ShiftedSupport, DEFAULT_C3, MAX_MOMENT_ORDER,
};
pub use partitions::{
    count_partitions_by_blocks, for_each_set_partition, partition_sum_g, GReport, MAX_G_SIZE,
};
pub use simplex::{log_rho, rho_r_maximize, RhoReport, MAX_SIMPLEX_POINTS};
pub use stirling::{
    c1_condition, falling_factorial, falling_factorial_check, stirling2, stirling_bound_fit,
    stirling_identity_check, C1Check, FallingFactorialRow, StirlingBoundFit, StirlingTable,
};
pub use union::{
    omega_decomposition, record_score, record_scores, record_witness, sampled_record_witness,
    trivial_tail_bound, union_bound_report, union_bound_with, write_union_bound_csv, ClassCount,
    OmegaParts, RecordWitness, UnionBoundReport, UnionBoundRow,
};
