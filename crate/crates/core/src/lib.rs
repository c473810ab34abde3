//! Coding for endurance-limited memories.
//!
//! An endurance-limited memory (ELM) is a block of `n` binary cells that are
//! rewritten `t` times, where each cell may change state at most `ℓ` times.
//! This crate covers the cell model ([`memory`]), the capacity regions and
//! maximum sum-rates of the informed-decoder models ([`capacity`]), finite
//! write-once-memory component codes ([`wom`]), executable ELM code
//! constructions with an exhaustive verifier ([`construction`]), and an exact
//! search for optimal zero-error codes at tiny parameters ([`search`]).

pub mod capacity;
pub mod construction;
pub mod memory;
pub mod search;
pub mod wom;

mod numeric;

pub use numeric::{binomial, binomial_prefix_sum, compensated_sum};

/// Node budget used by the combinatorial searches unless overridden.
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

/// Reads `ELM_SEARCH_BUDGET`, falling back to [`DEFAULT_SEARCH_BUDGET`].
pub fn search_budget_from_env() -> u64 {
    std::env::var("ELM_SEARCH_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEARCH_BUDGET)
}
