//! Counted query access to a shifted view `F_{s*}`. Solvers only ever see
//! the [`BitOracle`] interface; the hidden shift stays behind it.

use crate::canonical::{CanonicalFunction, Shift};
use crate::error::{Error, Result};

/// Default cap on retained query-log entries. The count stays exact even
/// when the log stops growing.
pub const DEFAULT_LOG_CAP: usize = 1_000_000;

pub trait BitOracle {
    /// Answer `F_{s*}(x)`, incrementing the query counter by exactly one.
    fn query(&mut self, x: usize) -> Result<bool>;

    fn queries_made(&self) -> usize;

    /// Probed indices in order, truncated at the log cap.
    fn query_log(&self) -> &[usize];
}

/// An oracle backed by a known function and a secret shift.
pub struct HiddenShiftOracle {
    f: CanonicalFunction,
    secret: Shift,
    count: usize,
    log: Vec<usize>,
    log_cap: usize,
}

impl HiddenShiftOracle {
    pub fn with_log_cap(mut self, cap: usize) -> Self {
        self.log_cap = cap;
        self.log.truncate(cap);
        self
    }
}

/// Query access to `F_{s*}` with a fresh counter.
pub fn make_oracle(f: &CanonicalFunction, s_star: Shift) -> Result<HiddenShiftOracle> {
    if s_star.value() > f.n() {
        return Err(Error::Domain(format!(
            "shift {} outside [0, {}]",
            s_star.value(),
            f.n()
        )));
    }
    Ok(HiddenShiftOracle {
        f: f.clone(),
        secret: s_star,
        count: 0,
        log: Vec::new(),
        log_cap: DEFAULT_LOG_CAP,
    })
}

impl BitOracle for HiddenShiftOracle {
    fn query(&mut self, x: usize) -> Result<bool> {
        let answer = self.f.shifted_eval(self.secret, x)?;
        self.count += 1;
        if self.log.len() < self.log_cap {
            self.log.push(x);
        }
        Ok(answer)
    }

    fn queries_made(&self) -> usize {
        self.count
    }

    fn query_log(&self) -> &[usize] {
        &self.log
    }
}

/// Wrapper that fails the `limit + 1`-th query, for asserting proven
/// query bounds in tests and benchmarks.
pub struct BudgetedOracle<O: BitOracle> {
    inner: O,
    limit: usize,
}

pub fn with_budget<O: BitOracle>(oracle: O, limit: usize) -> BudgetedOracle<O> {
    BudgetedOracle { inner: oracle, limit }
}

impl<O: BitOracle> BudgetedOracle<O> {
    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: BitOracle> BitOracle for BudgetedOracle<O> {
    fn query(&mut self, x: usize) -> Result<bool> {
        if self.inner.queries_made() >= self.limit {
            return Err(Error::BudgetExceeded { limit: self.limit });
        }
        self.inner.query(x)
    }

    fn queries_made(&self) -> usize {
        self.inner.queries_made()
    }

    fn query_log(&self) -> &[usize] {
        self.inner.query_log()
    }
}

impl BitOracle for &mut dyn BitOracle {
    fn query(&mut self, x: usize) -> Result<bool> {
        (**self).query(x)
    }

    fn queries_made(&self) -> usize {
        (**self).queries_made()
    }

    fn query_log(&self) -> &[usize] {
        (**self).query_log()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{generate, GenKind, InstanceParams, Pattern};
    use crate::canonical::CanonicalFunction;

    fn inst(n: usize, m: usize, p: &str) -> CanonicalFunction {
        CanonicalFunction::new(InstanceParams::new(n, m).unwrap(), Pattern::parse(p).unwrap())
            .unwrap()
    }

    #[test]
    fn counts_and_answers() {
        let f = inst(2, 4, "10");
        let mut o = make_oracle(&f, Shift(1)).unwrap();
        assert_eq!(o.queries_made(), 0);
        assert!(o.query(2).unwrap()); // F(3) = 1
        assert_eq!(o.queries_made(), 1);
        assert_eq!(o.query_log(), &[2]);
        assert!(o.query(7).is_err());
        // failed query does not count
        assert_eq!(o.queries_made(), 1);
    }

    #[test]
    fn zero_shift_matches_eval() {
        let f = inst(2, 4, "10");
        let mut o = make_oracle(&f, Shift(0)).unwrap();
        for x in 0..=6 {
            assert_eq!(o.query(x).unwrap(), f.eval(x).unwrap());
        }
    }

    #[test]
    fn shift_out_of_range() {
        let f = inst(2, 4, "10");
        assert!(make_oracle(&f, Shift(3)).is_err());
    }

    #[test]
    fn budget_trips() {
        let f = inst(2, 4, "10");
        let mut o = with_budget(make_oracle(&f, Shift(1)).unwrap(), 0);
        assert!(matches!(o.query(0), Err(Error::BudgetExceeded { limit: 0 })));

        let mut o = with_budget(make_oracle(&f, Shift(1)).unwrap(), 3);
        for x in 0..3 {
            o.query(x).unwrap();
        }
        assert!(matches!(o.query(3), Err(Error::BudgetExceeded { limit: 3 })));
    }

    #[test]
    fn log_cap_keeps_count_exact() {
        let f = inst(2, 4, "10");
        let mut o = make_oracle(&f, Shift(0)).unwrap().with_log_cap(2);
        for _ in 0..5 {
            o.query(0).unwrap();
        }
        assert_eq!(o.queries_made(), 5);
        assert_eq!(o.query_log().len(), 2);
    }

    #[test]
    fn oracle_matches_shifted_eval_exhaustive() {
        for n in 1..=6usize {
            for m in (n + 1)..=(16 - n).max(n + 1) {
                if m + n > 16 {
                    continue;
                }
                let f = generate(InstanceParams::new(n, m).unwrap(), GenKind::Random { seed: 3 })
                    .unwrap();
                for s in 0..=n {
                    let mut o = make_oracle(&f, Shift(s)).unwrap();
                    for x in 0..=(m + n) {
                        assert_eq!(o.query(x).unwrap(), f.shifted_eval(Shift(s), x).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn distinct_shifts_distinguishable() {
        // brute force over all small instances: any two shifts differ
        // somewhere in [0, m]
        for n in 1..=5usize {
            for m in (n + 1)..=(14 - n).max(n + 1) {
                if m + n > 14 {
                    continue;
                }
                let plen = m - n;
                for mask in 0u32..(1 << plen) {
                    let bits: Vec<bool> = (0..plen).map(|i| mask >> i & 1 == 1).collect();
                    let f = CanonicalFunction::new(
                        InstanceParams::new(n, m).unwrap(),
                        Pattern::new(bits),
                    )
                    .unwrap();
                    for s1 in 0..=n {
                        for s2 in (s1 + 1)..=n {
                            let differs = (0..=m).any(|x| {
                                f.shifted_eval(Shift(s1), x).unwrap()
                                    != f.shifted_eval(Shift(s2), x).unwrap()
                            });
                            assert!(differs, "shifts {s1},{s2} indistinguishable on {f}");
                        }
                    }
                }
            }
        }
    }
}
