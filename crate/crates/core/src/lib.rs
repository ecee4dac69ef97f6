//! Exact computation of geometric-progression-free subset counts.
//!
//! The crate is organised around four pieces:
//!
//! * [`apfree`] computes `r_k(ℓ)`, the largest subset of `{0, …, ℓ-1}` with no
//!   `k`-term arithmetic progression, by incremental branch and bound, plus an
//!   exhaustive oracle used to check it.
//! * [`geoprog`] evaluates `g_k^(s)(n)` through the chain decomposition of
//!   `{1, …, n}` into sets `{b·s^i}` and checks it against brute force.
//! * [`constant`] sums the limit constant `θ(k, s)` in exact rationals with a
//!   rigorous tail bound, and derives digit and gap statistics.
//! * [`cache`] persists computed `r_k` tables in a checksummed text format.
//!
//! Data-parallel work is dispatched through [`Parallelism`]; with the
//! `parallel` feature disabled every operation runs sequentially and produces
//! identical results.

pub mod apfree;
pub mod cache;
pub mod constant;
mod error;
mod exec;
pub mod geoprog;
pub mod rational;

pub use apfree::{
    has_k_term_ap, min_inverse, rk_bruteforce_oracle, rk_exact, rk_table, GapSequence, RkTable,
    SolverConfig,
};
pub use constant::{
    convergence_experiment, count_nondivisible, gap_stats, theta_digits, theta_partial,
    ConvergenceRow, DigitStream, GapStats, ThetaApproximation,
};
pub use error::{Error, Result};
pub use exec::Parallelism;
pub use geoprog::{
    chain_partition, g_bruteforce, g_formula, g_multi_ratio_bruteforce, g_witness, has_k_term_gp,
    ilog, monotonicity_experiment, ChainPartition, GResult,
};
