//! Streaming decision counters for the promise counting problem (output 0
//! for streams of length <= n, 1 for length > m), with bit-exact state
//! snapshots. A snapshot plus cloning turns a counter into a [`BitOracle`]
//! for its shifted canonical function: restore a fresh copy, insert `x`
//! items, read the output.

use crate::canonical::{CanonicalFunction, InstanceParams};
use crate::error::{Error, Result};
use crate::oracle::{BitOracle, DEFAULT_LOG_CAP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Opaque counter state: a raw bit-string with a declared length. The
/// declared length is the space figure reported everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamState {
    bits: Vec<bool>,
}

impl StreamState {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bit_len(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Encode an unsigned value into exactly `width` bits, LSB first.
    pub fn encode_uint(value: u64, width: usize) -> Self {
        Self {
            bits: (0..width).map(|i| i < 64 && value >> i & 1 == 1).collect(),
        }
    }

    pub fn decode_uint(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .take(64)
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    /// Length-prefixed wire form: u64 little-endian bit count, then the
    /// packed payload. The payload occupies exactly `bit_len` bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = (self.bits.len() as u64).to_le_bytes().to_vec();
        let mut byte = 0u8;
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                byte |= 1 << (i % 8);
            }
            if i % 8 == 7 {
                out.push(byte);
                byte = 0;
            }
        }
        if !self.bits.len().is_multiple_of(8) {
            out.push(byte);
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 8 {
            return Err(Error::Instance("state too short for length prefix".into()));
        }
        let bit_len = u64::from_le_bytes(data[..8].try_into().unwrap()) as usize;
        let payload = &data[8..];
        if payload.len() != bit_len.div_ceil(8) {
            return Err(Error::Instance("state payload length mismatch".into()));
        }
        let bits = (0..bit_len)
            .map(|i| payload[i / 8] >> (i % 8) & 1 == 1)
            .collect();
        Ok(Self { bits })
    }

    fn split(&self, widths: &[usize]) -> Result<Vec<StreamState>> {
        let total: usize = widths.iter().sum();
        if total != self.bits.len() {
            return Err(Error::Instance(format!(
                "state of {} bits cannot split into widths summing to {total}",
                self.bits.len()
            )));
        }
        let mut out = Vec::with_capacity(widths.len());
        let mut at = 0;
        for &w in widths {
            out.push(StreamState::from_bits(self.bits[at..at + w].to_vec()));
            at += w;
        }
        Ok(out)
    }

    fn concat(parts: &[StreamState]) -> StreamState {
        StreamState::from_bits(parts.iter().flat_map(|p| p.bits.iter().copied()).collect())
    }
}

/// A snapshot-able streaming decision algorithm for the counting promise.
pub trait StreamCounter: Send {
    fn insert(&mut self, items: usize);

    /// The promise decision for the stream seen so far.
    fn output(&self) -> bool;

    fn snapshot(&self) -> StreamState;

    fn restore(&mut self, state: &StreamState) -> Result<()>;

    /// Declared state size; always equals `snapshot().bit_len()`.
    fn state_size_bits(&self) -> usize;

    fn reseed(&mut self, seed: u64);

    fn clone_box(&self) -> Box<dyn StreamCounter>;
}

/// Exact counter: `ceil(log2(m+n+2))` bits, output 1 iff count > m.
pub struct DeterministicCounter {
    params: InstanceParams,
    count: usize,
}

pub fn deterministic_counter(params: InstanceParams) -> DeterministicCounter {
    DeterministicCounter { params, count: 0 }
}

fn bit_width(values: usize) -> usize {
    // bits needed to hold any value in [0, values-1]
    (usize::BITS - (values - 1).leading_zeros()) as usize
}

impl DeterministicCounter {
    fn cap(&self) -> usize {
        self.params.domain_max() + 1
    }
}

impl StreamCounter for DeterministicCounter {
    fn insert(&mut self, items: usize) {
        // saturate one past the domain so the state width stays truthful
        self.count = (self.count + items).min(self.cap());
    }

    fn output(&self) -> bool {
        self.count > self.params.m()
    }

    fn snapshot(&self) -> StreamState {
        StreamState::encode_uint(self.count as u64, self.state_size_bits())
    }

    fn restore(&mut self, state: &StreamState) -> Result<()> {
        if state.bit_len() != self.state_size_bits() {
            return Err(Error::Instance("state width mismatch".into()));
        }
        self.count = state.decode_uint() as usize;
        Ok(())
    }

    fn state_size_bits(&self) -> usize {
        bit_width(self.cap() + 1)
    }

    fn reseed(&mut self, _seed: u64) {}

    fn clone_box(&self) -> Box<dyn StreamCounter> {
        Box::new(DeterministicCounter {
            params: self.params,
            count: self.count,
        })
    }
}

/// Morris counter: keeps only an exponent `X`, incremented per item with
/// probability `(1+epsilon)^-X`. Estimate `((1+eps)^X - 1)/eps`; decides 1
/// when the estimate crosses the geometric mean `sqrt(n*m)`.
///
/// Only the exponent lives in the declared state; the generator is shared
/// randomness, carried out of band via seeds.
pub struct MorrisCounter {
    params: InstanceParams,
    epsilon: f64,
    exponent: u32,
    exponent_cap: u32,
    rng: ChaCha8Rng,
}

pub fn morris_counter(params: InstanceParams, epsilon: f64, seed: u64) -> Result<MorrisCounter> {
    if epsilon <= 0.0 {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    let base = 1.0 + epsilon;
    // largest exponent reachable before the estimate exceeds the domain
    let cap = ((1.0 + epsilon * (params.domain_max() + 1) as f64).log(base)).ceil() as u32 + 1;
    Ok(MorrisCounter {
        params,
        epsilon,
        exponent: 0,
        exponent_cap: cap,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl MorrisCounter {
    pub fn estimate(&self) -> f64 {
        ((1.0 + self.epsilon).powi(self.exponent as i32) - 1.0) / self.epsilon
    }
}

impl StreamCounter for MorrisCounter {
    fn insert(&mut self, items: usize) {
        let base = 1.0 + self.epsilon;
        for _ in 0..items {
            if self.exponent >= self.exponent_cap {
                continue;
            }
            let p = base.powi(-(self.exponent as i32));
            if self.rng.gen::<f64>() < p {
                self.exponent += 1;
            }
        }
    }

    fn output(&self) -> bool {
        let threshold = ((self.params.n() * self.params.m()) as f64).sqrt();
        self.estimate() > threshold
    }

    fn snapshot(&self) -> StreamState {
        StreamState::encode_uint(self.exponent as u64, self.state_size_bits())
    }

    fn restore(&mut self, state: &StreamState) -> Result<()> {
        if state.bit_len() != self.state_size_bits() {
            return Err(Error::Instance("state width mismatch".into()));
        }
        self.exponent = state.decode_uint() as u32;
        Ok(())
    }

    fn state_size_bits(&self) -> usize {
        bit_width(self.exponent_cap as usize + 1)
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn clone_box(&self) -> Box<dyn StreamCounter> {
        Box::new(MorrisCounter {
            params: self.params,
            epsilon: self.epsilon,
            exponent: self.exponent,
            exponent_cap: self.exponent_cap,
            rng: self.rng.clone(),
        })
    }
}

/// Builds an independently seeded counter instance.
pub trait CounterFactory: Sync {
    fn make(&self, seed: u64) -> Box<dyn StreamCounter>;
}

impl<F> CounterFactory for F
where
    F: Fn(u64) -> Box<dyn StreamCounter> + Sync,
{
    fn make(&self, seed: u64) -> Box<dyn StreamCounter> {
        self(seed)
    }
}

/// Named counter constructions, for CLI flags and sweep rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CounterSpec {
    Deterministic,
    Morris { epsilon: f64 },
}

impl CounterSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CounterSpec::Deterministic => "det",
            CounterSpec::Morris { .. } => "morris",
        }
    }

    pub fn factory(self, params: InstanceParams) -> impl CounterFactory {
        move |seed: u64| -> Box<dyn StreamCounter> {
            match self {
                CounterSpec::Deterministic => Box::new(deterministic_counter(params)),
                CounterSpec::Morris { epsilon } => Box::new(
                    morris_counter(params, epsilon, seed)
                        .expect("CounterSpec carries a validated epsilon"),
                ),
            }
        }
    }
}

/// splitmix64 step; used to derive child seeds deterministically.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Majority vote over independently seeded copies. Child seed `i` derives
/// from the root seed, so Alice and Bob reconstruct the same copies.
pub struct AmplifiedCounter {
    copies: Vec<Box<dyn StreamCounter>>,
}

pub fn amplify(
    factory: &dyn CounterFactory,
    copies: usize,
    root_seed: u64,
) -> Result<AmplifiedCounter> {
    if copies < 1 || copies.is_multiple_of(2) {
        return Err(Error::Domain(format!("copies must be odd and >= 1, got {copies}")));
    }
    Ok(AmplifiedCounter {
        copies: (0..copies)
            .map(|i| factory.make(derive_seed(root_seed, i as u64)))
            .collect(),
    })
}

impl StreamCounter for AmplifiedCounter {
    fn insert(&mut self, items: usize) {
        for c in &mut self.copies {
            c.insert(items);
        }
    }

    fn output(&self) -> bool {
        let ones = self.copies.iter().filter(|c| c.output()).count();
        2 * ones > self.copies.len()
    }

    fn snapshot(&self) -> StreamState {
        let parts: Vec<StreamState> = self.copies.iter().map(|c| c.snapshot()).collect();
        StreamState::concat(&parts)
    }

    fn restore(&mut self, state: &StreamState) -> Result<()> {
        let widths: Vec<usize> = self.copies.iter().map(|c| c.state_size_bits()).collect();
        let parts = state.split(&widths)?;
        for (c, p) in self.copies.iter_mut().zip(&parts) {
            c.restore(p)?;
        }
        Ok(())
    }

    fn state_size_bits(&self) -> usize {
        self.copies.iter().map(|c| c.state_size_bits()).sum()
    }

    fn reseed(&mut self, seed: u64) {
        for (i, c) in self.copies.iter_mut().enumerate() {
            c.reseed(derive_seed(seed, i as u64));
        }
    }

    fn clone_box(&self) -> Box<dyn StreamCounter> {
        Box::new(AmplifiedCounter {
            copies: self.copies.iter().map(|c| c.clone_box()).collect(),
        })
    }
}

/// Per-length majority decision of a counter construction, estimated by
/// repeated fresh runs. Ties (possible with even trial counts) resolve
/// toward 0 and are flagged.
#[derive(Debug, Clone)]
pub struct EmpiricalCanonical {
    pub majority: Vec<bool>,
    pub margin: Vec<f64>,
    pub tie: Vec<bool>,
    pub trials_per_length: usize,
    /// Lengths where the majority violates the promise: 1 at l <= n or
    /// 0 at l > m.
    pub violations: Vec<usize>,
}

impl EmpiricalCanonical {
    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Lengths whose margin falls below the pseudo-determinism bar.
    pub fn lengths_below(&self, bar: f64) -> Vec<usize> {
        self.margin
            .iter()
            .enumerate()
            .filter(|(_, &m)| m < bar)
            .map(|(l, _)| l)
            .collect()
    }
}

pub fn empirical_canonical(
    factory: &dyn CounterFactory,
    params: InstanceParams,
    trials_per_length: usize,
    seed: u64,
) -> Result<EmpiricalCanonical> {
    if trials_per_length < 1 {
        return Err(Error::Domain("trials_per_length must be at least 1".into()));
    }
    let lengths: Vec<usize> = (0..=params.domain_max()).collect();
    let per_length: Vec<(bool, f64, bool)> = lengths
        .par_iter()
        .map(|&l| {
            let mut ones = 0usize;
            for trial in 0..trials_per_length {
                let mut c = factory.make(derive_seed(derive_seed(seed, l as u64), trial as u64));
                c.insert(l);
                if c.output() {
                    ones += 1;
                }
            }
            let zeros = trials_per_length - ones;
            let majority = ones > zeros;
            let margin = ones.max(zeros) as f64 / trials_per_length as f64;
            (majority, margin, ones == zeros)
        })
        .collect();
    let mut out = EmpiricalCanonical {
        majority: per_length.iter().map(|r| r.0).collect(),
        margin: per_length.iter().map(|r| r.1).collect(),
        tie: per_length.iter().map(|r| r.2).collect(),
        trials_per_length,
        violations: Vec::new(),
    };
    out.violations = (0..=params.domain_max())
        .filter(|&l| {
            (l <= params.n() && out.majority[l]) || (l > params.m() && !out.majority[l])
        })
        .collect();
    Ok(out)
}

/// [`BitOracle`] backed by a streaming counter that was already fed the
/// hidden number of items: each query clones a fresh copy, inserts `x`
/// items, and reads the decision.
pub struct StreamingOracle {
    base: Box<dyn StreamCounter>,
    domain_max: usize,
    count: usize,
    log: Vec<usize>,
}

pub fn streaming_oracle(
    counter: Box<dyn StreamCounter>,
    f_declared: &CanonicalFunction,
) -> StreamingOracle {
    StreamingOracle {
        base: counter,
        domain_max: f_declared.domain_max(),
        count: 0,
        log: Vec::new(),
    }
}

impl BitOracle for StreamingOracle {
    fn query(&mut self, x: usize) -> Result<bool> {
        if x > self.domain_max {
            return Err(Error::Domain(format!("index {x} outside [0, {}]", self.domain_max)));
        }
        let mut fresh = self.base.clone_box();
        fresh.insert(x);
        self.count += 1;
        if self.log.len() < DEFAULT_LOG_CAP {
            self.log.push(x);
        }
        Ok(fresh.output())
    }

    fn queries_made(&self) -> usize {
        self.count
    }

    fn query_log(&self) -> &[usize] {
        &self.log
    }
}

/// Exact-count recovery from a tracking counter fed `s <= n` items: clone
/// and insert one item at a time until the output flips to 1 at offset
/// `x`; then `s = first_one(f) - x`.
pub fn recover_count_from_tracking(
    counter: &dyn StreamCounter,
    f: &CanonicalFunction,
) -> Result<usize> {
    let mut probe = counter.clone_box();
    let mut offset = 0usize;
    while !probe.output() {
        if offset > f.domain_max() + 1 {
            return Err(Error::Integrity(
                "counter output never flipped to 1; not a valid tracking counter".into(),
            ));
        }
        probe.insert(1);
        offset += 1;
    }
    let first_one = f.first_one();
    if offset > first_one {
        return Err(Error::Integrity(format!(
            "flip offset {offset} exceeds first_one {first_one}"
        )));
    }
    Ok(first_one - offset)
}
