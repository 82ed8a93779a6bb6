//! Cramér-type random models and exact counts of integers with many prime
//! factors.

mod gaps;
mod pik;
mod search;

pub use gaps::{
    gap_report, simulate_gaps, simulate_trial, simulate_trials, write_gap_rows, write_gaps_header,
    CramerConfig, GapAccumulator, GapReport, GapRow, RateFunction, TrialGaps, TrialSummary,
    HIST_BIN, HIST_BINS, MAX_CRAMER_N,
};
pub use pik::{
    count_pi_k, density_ratio, pi_k_counts, pi_k_lower_shape, pi_k_row, write_pik_csv, PiKRow,
    MAX_PI_K_X,
};
pub use search::{
    chain_check, erdos679_refuter, required_count, window_length, window_search, write_witness_csv,
    ChainCheck, RefuteResult, SearchParams, Variant, WindowResult, MAX_WINDOW,
};
