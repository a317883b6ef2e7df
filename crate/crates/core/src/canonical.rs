//! The canonical function `F`: a total 0/1 function on `[0, m+n]` that is
//! all zeros on `[0, n]`, all ones on `[m+1, m+n]`, and carries a free
//! pattern of length `m - n` in between. Shifted views `F_s(x) = F(s + x)`
//! are what solvers query through an oracle.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stream-length regime `(n, m)`: shifts live in `[0, n]`, the function
/// domain is `[0, m+n]`, and the pattern has length `m - n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InstanceParams {
    n: usize,
    m: usize,
}

impl InstanceParams {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if m <= n {
            return Err(Error::Domain(format!("m must exceed n (got n={n}, m={m})")));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Largest valid index of `F`, i.e. `m + n`.
    pub fn domain_max(&self) -> usize {
        self.m + self.n
    }

    pub fn pattern_len(&self) -> usize {
        self.m - self.n
    }
}

/// The free middle section of `F`, exactly `m - n` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    bits: Vec<bool>,
}

impl Pattern {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::Instance(format!("pattern must be over 01, got {ch:?}"))),
            }
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn as_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// A hidden shift value `s ∈ [0, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shift(pub usize);

impl Shift {
    pub fn value(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for Shift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    m: usize,
    pattern: String,
}

/// `F: [0, m+n] -> {0,1}` with the fixed zero prefix and one suffix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct CanonicalFunction {
    params: InstanceParams,
    pattern: Pattern,
}

impl TryFrom<InstanceFile> for CanonicalFunction {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let params = InstanceParams::new(file.n, file.m)?;
        CanonicalFunction::new(params, Pattern::parse(&file.pattern)?)
    }
}

impl From<CanonicalFunction> for InstanceFile {
    fn from(f: CanonicalFunction) -> Self {
        InstanceFile {
            n: f.params.n,
            m: f.params.m,
            pattern: f.pattern.as_string(),
        }
    }
}

impl CanonicalFunction {
    pub fn new(params: InstanceParams, pattern: Pattern) -> Result<Self> {
        if pattern.len() != params.pattern_len() {
            return Err(Error::Instance(format!(
                "pattern length {} does not match m - n = {}",
                pattern.len(),
                params.pattern_len()
            )));
        }
        Ok(Self { params, pattern })
    }

    pub fn params(&self) -> InstanceParams {
        self.params
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn domain_max(&self) -> usize {
        self.params.domain_max()
    }

    /// Unchecked evaluation; callers guarantee `x <= m + n`.
    #[inline]
    pub(crate) fn bit(&self, x: usize) -> bool {
        debug_assert!(x <= self.params.domain_max());
        if x <= self.params.n {
            false
        } else if x > self.params.m {
            true
        } else {
            self.pattern.bit(x - self.params.n - 1)
        }
    }

    /// `F(x)`: 0 on the prefix, 1 on the suffix, pattern bit in between.
    pub fn eval(&self, x: usize) -> Result<bool> {
        if x > self.params.domain_max() {
            return Err(Error::Domain(format!(
                "index {x} outside [0, {}]",
                self.params.domain_max()
            )));
        }
        Ok(self.bit(x))
    }

    /// `F_s(x) = F(min(s + x, m + n))`. The clamp extends every shifted
    /// view by ones, matching a stream that keeps answering 1 once full.
    pub fn shifted_eval(&self, s: Shift, x: usize) -> Result<bool> {
        if x > self.params.domain_max() {
            return Err(Error::Domain(format!(
                "index {x} outside [0, {}]",
                self.params.domain_max()
            )));
        }
        Ok(self.shifted_bit(s, x))
    }

    #[inline]
    pub(crate) fn shifted_bit(&self, s: Shift, x: usize) -> bool {
        self.bit((s.0 + x).min(self.params.domain_max()))
    }

    /// Smallest `x` with `F(x) = 1`; always in `[n+1, m+1]`.
    pub fn first_one(&self) -> usize {
        for i in 0..self.pattern.len() {
            if self.pattern.bit(i) {
                return self.params.n + 1 + i;
            }
        }
        self.params.m + 1
    }

    /// Largest `x` with `F(x) = 0`; always in `[n, m]`.
    pub fn last_zero(&self) -> usize {
        for i in (0..self.pattern.len()).rev() {
            if !self.pattern.bit(i) {
                return self.params.n + 1 + i;
            }
        }
        self.params.n
    }

    /// Number of occurrences of the gap-`k` pattern: indices `x` with
    /// `F(x) = 0` and `F(x + k) = 1`.
    pub fn count_pattern(&self, k: usize) -> Result<usize> {
        if k < 1 || k > self.params.n {
            return Err(Error::Domain(format!("gap k={k} outside [1, {}]", self.params.n)));
        }
        let top = self.params.domain_max() - k;
        let mut count = 0;
        for x in 0..=top {
            if !self.bit(x) && self.bit(x + k) {
                count += 1;
            }
        }
        Ok(count)
    }

    /// The gap `k ∈ [1, n]` whose pattern is rarest, with its count.
    /// Ties break toward the smaller `k`.
    pub fn min_pattern_count(&self) -> (usize, usize) {
        let mut best_k = 1;
        let mut best = self.count_pattern(1).expect("k=1 is always in range");
        for k in 2..=self.params.n {
            let c = self.count_pattern(k).expect("k in range");
            if c < best {
                best = c;
                best_k = k;
            }
        }
        (best_k, best)
    }

    /// The full string `F` as bits, length `m + n + 1`.
    pub fn to_bits(&self) -> Vec<bool> {
        (0..=self.params.domain_max()).map(|x| self.bit(x)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl std::fmt::Display for CanonicalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for x in 0..=self.params.domain_max() {
            write!(f, "{}", if self.bit(x) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// `t = max(1, floor(n / 2^sqrt(log2(n) * log2(log2(m)))))`, the scenario
/// threshold that balances pattern scarcity against elimination cost.
pub fn threshold_t(n: usize, m: usize) -> Result<usize> {
    if n < 4 {
        return Err(Error::Domain("threshold_t requires n >= 4".into()));
    }
    if m <= n {
        return Err(Error::Domain("threshold_t requires m > n".into()));
    }
    let exponent = ((n as f64).log2() * (m as f64).log2().log2()).sqrt();
    let t = (n as f64 / exponent.exp2()).floor() as usize;
    Ok(t.max(1))
}

/// Instance generators for tests and benchmarks.
#[derive(Debug, Clone)]
pub enum GenKind {
    /// Uniformly random pattern, reproducible from the seed.
    Random { seed: u64 },
    /// Step function: `F(x) = 0` for `x <= position`, 1 after.
    /// `position` must lie in `[n, m]`.
    Step { position: usize },
    /// Alternating blocks of zeros and ones of the given period,
    /// starting with zeros. `period` must lie in `[1, m-n]`.
    Periodic { period: usize },
    /// Explicit pattern bits.
    Explicit { bits: String },
}

pub fn generate(params: InstanceParams, kind: GenKind) -> Result<CanonicalFunction> {
    let len = params.pattern_len();
    let pattern = match kind {
        GenKind::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Pattern::new((0..len).map(|_| rng.gen::<bool>()).collect())
        }
        GenKind::Step { position } => {
            if position < params.n() || position > params.m() {
                return Err(Error::Domain(format!(
                    "step position {position} outside [{}, {}]",
                    params.n(),
                    params.m()
                )));
            }
            // F(x) = 0 for x <= position: pattern index i covers x = n+1+i.
            Pattern::new((0..len).map(|i| params.n() + 1 + i > position).collect())
        }
        GenKind::Periodic { period } => {
            if period < 1 || period > len {
                return Err(Error::Domain(format!("period {period} outside [1, {len}]")));
            }
            Pattern::new((0..len).map(|i| (i / period) % 2 == 1).collect())
        }
        GenKind::Explicit { bits } => Pattern::parse(&bits)?,
    };
    CanonicalFunction::new(params, pattern)
}
