//! Shift finding over step-bounded bit strings.
//!
//! An instance is a function `F: [0, m+n] -> {0,1}` that starts with `n+1`
//! zeros, ends with `n` ones, and carries a free pattern in between. A
//! hidden shift `s* ∈ [0, n]` produces the view `F_{s*}(x) = F(s* + x)`,
//! reachable only through a counted bit oracle; solvers recover `s*` with
//! as few queries as possible. The [`streaming`] module links this to
//! approximate counting: a snapshot-able streaming counter is itself such
//! an oracle for its own canonical function, which grounds the one-way
//! protocol simulation in [`protocol`].

pub mod bench;
pub mod canonical;
pub mod error;
pub mod oracle;
pub mod protocol;
pub mod solve;
pub mod streaming;

pub use canonical::{
    generate, threshold_t, CanonicalFunction, GenKind, InstanceParams, Pattern, Shift,
};
pub use error::{Error, Result};
pub use oracle::{make_oracle, with_budget, BitOracle};
pub use solve::{
    binary_search_pattern, brute_force_find_shift, candidates_from_location,
    find_shift_deterministic, find_shift_hybrid, find_shift_random_elimination, verify_shift,
    Answer, CandidateSet, SolveReport,
};
pub use streaming::{
    amplify, deterministic_counter, empirical_canonical, morris_counter,
    recover_count_from_tracking, streaming_oracle, CounterSpec, StreamCounter, StreamState,
};
