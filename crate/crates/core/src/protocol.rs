//! One-way message protocol: Alice feeds her shift into an amplified
//! counter and sends its state; Bob turns the state into query access and
//! runs a shift solver. Measures message bits, simulated queries, and
//! recovery success.

use crate::canonical::{CanonicalFunction, Shift};
use crate::error::{Error, Result};
use crate::oracle::{make_oracle, BitOracle};
use crate::solve::{binary_search_pattern, find_shift_hybrid};
use crate::streaming::{amplify, derive_seed, streaming_oracle, CounterFactory, StreamCounter};
use std::collections::BTreeMap;

/// Partition of `[0, n]` by the binary-search landing spot `M(s)` on the
/// gap-`k` grid. Bucket representatives form the protocol alphabet.
#[derive(Debug, Clone)]
pub struct Buckets {
    k: usize,
    by_location: BTreeMap<usize, Vec<Shift>>,
}

impl Buckets {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn by_location(&self) -> &BTreeMap<usize, Vec<Shift>> {
        &self.by_location
    }

    /// Smallest shift of each bucket, in location order.
    pub fn representatives(&self) -> Vec<Shift> {
        self.by_location.values().map(|b| b[0]).collect()
    }

    pub fn representative_at(&self, location: usize) -> Option<Shift> {
        self.by_location.get(&location).map(|b| b[0])
    }

    pub fn len(&self) -> usize {
        self.by_location.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_location.is_empty()
    }

    pub fn max_bucket_size(&self) -> usize {
        self.by_location.values().map(|b| b.len()).max().unwrap_or(0)
    }
}

/// Compute `M(s)` for every shift by running the pattern binary search
/// against a zero-cost local oracle, then group by landing spot.
pub fn build_buckets(f: &CanonicalFunction, k: usize) -> Result<Buckets> {
    if k < 1 || k > f.n() {
        return Err(Error::Domain(format!("gap k={k} outside [1, {}]", f.n())));
    }
    let mut by_location: BTreeMap<usize, Vec<Shift>> = BTreeMap::new();
    for s in 0..=f.n() {
        let mut local = make_oracle(f, Shift(s))?;
        let location = binary_search_pattern(f, &mut local, k)?;
        by_location.entry(location).or_default().push(Shift(s));
    }
    Ok(Buckets { k, by_location })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Bob runs the hybrid solver to recover the exact shift.
    FullShift,
    /// Bob binary-searches the gap-`k` pattern and answers the bucket
    /// representative of the landing spot.
    Bucket { k: usize },
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Strategy::FullShift => "full_shift".into(),
            Strategy::Bucket { k } => format!("bucket({k})"),
        }
    }
}

/// One protocol run: the Alice-to-Bob message plus accounting.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub message_bits: usize,
    pub simulated_queries: usize,
    pub alice_input: Shift,
    pub bob_output: Option<Shift>,
    pub success: bool,
}

pub fn run_message_protocol(
    factory: &dyn CounterFactory,
    f: &CanonicalFunction,
    strategy: Strategy,
    s_star: Shift,
    amplification_copies: usize,
    seed: u64,
) -> Result<Transcript> {
    if s_star.value() > f.n() {
        return Err(Error::Domain(format!("shift {s_star} outside [0, {}]", f.n())));
    }

    // Alice: shared-seed amplified counter, insert the input, send state.
    let mut alice = amplify(factory, amplification_copies, seed)?;
    alice.insert(s_star.value());
    let message = alice.snapshot();
    let message_bits = message.bit_len();

    // Bob: rebuild the same amplified counter from the shared seed,
    // load the state, and wrap it as query access to F_{s*}.
    let mut bob_counter = amplify(factory, amplification_copies, seed)?;
    bob_counter.restore(&message)?;
    let mut oracle = streaming_oracle(Box::new(bob_counter), f);

    let bob_output = match strategy {
        Strategy::FullShift => {
            match find_shift_hybrid(f, &mut oracle, derive_seed(seed, u64::MAX)) {
                Ok(report) => report.answer.shift(),
                // a noisy counter can leave no verifiable candidate;
                // that is a protocol failure, not a caller error
                Err(Error::Integrity(_)) => None,
                Err(e) => return Err(e),
            }
        }
        Strategy::Bucket { k } => {
            let buckets = build_buckets(f, k)?;
            let location = binary_search_pattern(f, &mut oracle, k)?;
            buckets.representative_at(location)
        }
    };

    Ok(Transcript {
        message_bits,
        simulated_queries: oracle.queries_made(),
        alice_input: s_star,
        bob_output,
        success: bob_output == Some(s_star),
    })
}
