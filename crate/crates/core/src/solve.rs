//! Shift-recovery algorithms. Every solver sees the instance `F` in full
//! but touches the hidden view `F_{s*}` only through a [`BitOracle`].

use crate::canonical::{CanonicalFunction, Shift};
use crate::error::{Error, Result};
use crate::oracle::BitOracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sorted set of shifts still consistent with the answers seen so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    shifts: Vec<Shift>,
}

impl CandidateSet {
    pub fn new(mut shifts: Vec<Shift>) -> Self {
        shifts.sort();
        shifts.dedup();
        Self { shifts }
    }

    pub fn shifts(&self) -> &[Shift] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn contains(&self, s: Shift) -> bool {
        self.shifts.binary_search(&s).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Found(Shift),
    Fail,
}

impl Answer {
    pub fn shift(&self) -> Option<Shift> {
        match self {
            Answer::Found(s) => Some(*s),
            Answer::Fail => None,
        }
    }
}

/// Outcome of one solver run, with exact query accounting.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub answer: Answer,
    pub queries: usize,
    pub method: &'static str,
    pub trace: Option<Vec<usize>>,
}

impl SolveReport {
    fn finish(
        answer: Answer,
        method: &'static str,
        oracle: &dyn BitOracle,
        count_before: usize,
        log_before: usize,
    ) -> Self {
        let log = oracle.query_log();
        let trace = if log.len() >= log_before && oracle.queries_made() - count_before == log.len() - log_before
        {
            Some(log[log_before..].to_vec())
        } else {
            None // log hit its cap mid-run; counts stay exact
        };
        SolveReport {
            answer,
            queries: oracle.queries_made() - count_before,
            method,
            trace,
        }
    }
}

/// Two-query witness check: probes `first_one - s` and `last_zero - s`
/// and accepts iff both answers match `F` itself. Accepts iff `s` equals
/// the oracle's hidden shift.
pub fn verify_shift(f: &CanonicalFunction, oracle: &mut dyn BitOracle, s: Shift) -> Result<bool> {
    if s.value() > f.n() {
        return Err(Error::Domain(format!("shift {s} outside [0, {}]", f.n())));
    }
    let l = f.first_one();
    let r = f.last_zero();
    // l >= n+1 > s and r >= n >= s, so both probes are in range
    let at_l = oracle.query(l - s.value())?;
    let at_r = oracle.query(r - s.value())?;
    Ok(at_l && !at_r)
}

/// Grid indices `{0, g, 2g, ...} ∩ [0, m]` plus `m`, with `g = ceil(sqrt(m))`.
pub fn grid_indices(m: usize) -> Vec<usize> {
    let g = (m as f64).sqrt().ceil() as usize;
    let mut grid: Vec<usize> = (0..=m).step_by(g).collect();
    if *grid.last().unwrap() != m {
        grid.push(m);
    }
    grid
}

/// Shifts consistent with every grid answer; checked against `F` locally,
/// no oracle queries.
pub fn consistent_shifts(
    f: &CanonicalFunction,
    grid: &[usize],
    answers: &[bool],
) -> CandidateSet {
    let shifts = (0..=f.n())
        .map(Shift)
        .filter(|&s| {
            grid.iter()
                .zip(answers)
                .all(|(&x, &a)| f.shifted_eval(s, x).unwrap() == a)
        })
        .collect();
    CandidateSet::new(shifts)
}

/// Deterministic shift finding: query a sqrt-spaced grid, keep the
/// consistent shifts, then verify each with the two-query witness.
pub fn find_shift_deterministic(
    f: &CanonicalFunction,
    oracle: &mut dyn BitOracle,
) -> Result<SolveReport> {
    let count_before = oracle.queries_made();
    let log_before = oracle.query_log().len();
    let grid = grid_indices(f.m());
    let mut answers = Vec::with_capacity(grid.len());
    for &x in &grid {
        answers.push(oracle.query(x)?);
    }
    let candidates = consistent_shifts(f, &grid, &answers);
    for &s in candidates.shifts() {
        if verify_shift(f, oracle, s)? {
            return Ok(SolveReport::finish(
                Answer::Found(s),
                "deterministic",
                oracle,
                count_before,
                log_before,
            ));
        }
    }
    Err(Error::Integrity(
        "no candidate shift verified; oracle is not a shifted view of F".into(),
    ))
}

/// Binary search for the gap-`k` pattern on the grid `{0, k, 2k, ...}`.
///
/// The left endpoint 0 answers 0 (`F_s(0) = 0` for every `s <= n`) and the
/// virtual right endpoint `(ceil(m/k)+1)*k > m` answers 1 under the clamped
/// extension, so neither is queried. Returns the final left index `l`,
/// which satisfies `oracle(l) = 0` and `oracle(l+k) = 1`.
pub fn binary_search_pattern(
    f: &CanonicalFunction,
    oracle: &mut dyn BitOracle,
    k: usize,
) -> Result<usize> {
    if k < 1 || k > f.n() {
        return Err(Error::Domain(format!("gap k={k} outside [1, {}]", f.n())));
    }
    let m = f.m();
    let top = m.div_ceil(k); // grid units; position top*k >= m
    let mut left = 0usize;
    let mut right = top + 1; // position > m, answer 1 without querying
    while right - left > 1 {
        let mid = (left + right) / 2;
        if oracle.query(mid * k)? {
            right = mid;
        } else {
            left = mid;
        }
    }
    Ok(left * k)
}

/// Every shift that could place a gap-`k` pattern at location `l`:
/// `{x - l : F(x)=0, F(x+k)=1, x - l ∈ [0, n]}`.
pub fn candidates_from_location(f: &CanonicalFunction, k: usize, l: usize) -> Result<CandidateSet> {
    if k < 1 || k > f.n() {
        return Err(Error::Domain(format!("gap k={k} outside [1, {}]", f.n())));
    }
    let top = f.domain_max() - k;
    let mut shifts = Vec::new();
    for x in l..=(l + f.n()).min(top) {
        if !f.eval(x)? && f.eval(x + k)? {
            shifts.push(Shift(x - l));
        }
    }
    Ok(CandidateSet::new(shifts))
}

/// Random elimination: repeatedly query a uniform `r ∈ [1, m]` and discard
/// every shift whose view disagrees. The true shift always survives;
/// anything else dies with probability at least `t/m` per round.
pub fn find_shift_random_elimination(
    f: &CanonicalFunction,
    oracle: &mut dyn BitOracle,
    t: usize,
    rng_seed: u64,
) -> Result<SolveReport> {
    if t < 1 {
        return Err(Error::Domain("threshold t must be at least 1".into()));
    }
    let count_before = oracle.queries_made();
    let log_before = oracle.query_log().len();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let rounds = (10.0 * f.m() as f64 * (f.n() as f64).log2() / t as f64).ceil() as usize;
    let mut survivors: Vec<Shift> = (0..=f.n()).map(Shift).collect();
    for _ in 0..rounds {
        if survivors.len() == 1 {
            break;
        }
        let r = rng.gen_range(1..=f.m());
        let answer = oracle.query(r)?;
        survivors.retain(|&s| f.shifted_eval(s, r).unwrap() == answer);
    }
    let answer = if survivors.len() == 1 {
        Answer::Found(survivors[0])
    } else {
        Answer::Fail
    };
    Ok(SolveReport::finish(
        answer,
        "random-elimination",
        oracle,
        count_before,
        log_before,
    ))
}

/// Two-scenario hybrid with `t = ceil(sqrt(m * log2(m)))`: if some gap-`k`
/// pattern is rare, binary-search for it and verify the few candidate
/// shifts; otherwise fall back to random elimination.
pub fn find_shift_hybrid(
    f: &CanonicalFunction,
    oracle: &mut dyn BitOracle,
    rng_seed: u64,
) -> Result<SolveReport> {
    let count_before = oracle.queries_made();
    let log_before = oracle.query_log().len();
    let t = (f.m() as f64 * (f.m() as f64).log2()).sqrt().ceil() as usize;
    let (k_star, count) = f.min_pattern_count();
    if count <= t.max(1) {
        let l = binary_search_pattern(f, oracle, k_star)?;
        let candidates = candidates_from_location(f, k_star, l)?;
        for &s in candidates.shifts() {
            if verify_shift(f, oracle, s)? {
                return Ok(SolveReport::finish(
                    Answer::Found(s),
                    "hybrid",
                    oracle,
                    count_before,
                    log_before,
                ));
            }
        }
        Err(Error::Integrity(
            "no pattern candidate verified; oracle is not a shifted view of F".into(),
        ))
    } else {
        let mut report = find_shift_random_elimination(f, oracle, t, rng_seed)?;
        report.method = "hybrid";
        Ok(report)
    }
}

/// Reference solver: query all of `[0, m]` and keep the unique consistent
/// shift. `m + 1` queries, full information.
pub fn brute_force_find_shift(
    f: &CanonicalFunction,
    oracle: &mut dyn BitOracle,
) -> Result<SolveReport> {
    let count_before = oracle.queries_made();
    let log_before = oracle.query_log().len();
    let mut answers = Vec::with_capacity(f.m() + 1);
    for x in 0..=f.m() {
        answers.push(oracle.query(x)?);
    }
    let survivors: Vec<Shift> = (0..=f.n())
        .map(Shift)
        .filter(|&s| (0..=f.m()).all(|x| f.shifted_eval(s, x).unwrap() == answers[x]))
        .collect();
    if survivors.len() != 1 {
        return Err(Error::Integrity(format!(
            "expected a unique consistent shift, found {}",
            survivors.len()
        )));
    }
    Ok(SolveReport::finish(
        Answer::Found(survivors[0]),
        "brute-force",
        oracle,
        count_before,
        log_before,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{generate, GenKind, InstanceParams, Pattern};
    use crate::oracle::{make_oracle, with_budget};

    fn inst(n: usize, m: usize, p: &str) -> CanonicalFunction {
        CanonicalFunction::new(InstanceParams::new(n, m).unwrap(), Pattern::parse(p).unwrap())
            .unwrap()
    }

    fn all_instances(max_total: usize) -> Vec<CanonicalFunction> {
        let mut out = Vec::new();
        for n in 1..max_total {
            for m in (n + 1)..max_total {
                if m + n > max_total {
                    continue;
                }
                let plen = m - n;
                if plen > 12 {
                    continue;
                }
                for mask in 0u32..(1 << plen) {
                    let bits: Vec<bool> = (0..plen).map(|i| mask >> i & 1 == 1).collect();
                    out.push(
                        CanonicalFunction::new(
                            InstanceParams::new(n, m).unwrap(),
                            Pattern::new(bits),
                        )
                        .unwrap(),
                    );
                }
            }
        }
        out
    }

    #[test]
    fn witness_examples() {
        let f = inst(2, 4, "10"); // l = 3, r = 4
        let mut o = make_oracle(&f, Shift(1)).unwrap();
        assert!(verify_shift(&f, &mut o, Shift(1)).unwrap());
        assert_eq!(o.queries_made(), 2);
        assert_eq!(o.query_log(), &[2, 3]);

        let mut o = make_oracle(&f, Shift(1)).unwrap();
        assert!(!verify_shift(&f, &mut o, Shift(0)).unwrap());
        let mut o = make_oracle(&f, Shift(1)).unwrap();
        assert!(!verify_shift(&f, &mut o, Shift(2)).unwrap());
    }

    #[test]
    fn witness_exact_small() {
        for f in all_instances(12) {
            for s_star in 0..=f.n() {
                for s in 0..=f.n() {
                    let mut o = make_oracle(&f, Shift(s_star)).unwrap();
                    let ok = verify_shift(&f, &mut o, Shift(s)).unwrap();
                    assert_eq!(ok, s == s_star, "f={f} s={s} s*={s_star}");
                    assert_eq!(o.queries_made(), 2);
                }
            }
        }
    }

    #[test]
    fn deterministic_worked_example() {
        let f = inst(2, 4, "10");
        let mut o = make_oracle(&f, Shift(1)).unwrap();
        let report = find_shift_deterministic(&f, &mut o).unwrap();
        assert_eq!(report.answer, Answer::Found(Shift(1)));
        assert_eq!(report.queries, 5); // grid {0,2,4} + 2-query witness
        assert_eq!(report.trace.as_deref(), Some(&[0, 2, 4, 2, 3][..]));
    }

    #[test]
    fn deterministic_exhaustive_small() {
        for f in all_instances(14) {
            let g = (f.m() as f64).sqrt().ceil() as usize;
            for s_star in 0..=f.n() {
                let mut o = make_oracle(&f, Shift(s_star)).unwrap();
                let report = find_shift_deterministic(&f, &mut o).unwrap();
                assert_eq!(report.answer, Answer::Found(Shift(s_star)), "f={f}");
                // candidate-set size bound, recomputed locally
                let grid = grid_indices(f.m());
                let answers: Vec<bool> = grid
                    .iter()
                    .map(|&x| f.shifted_eval(Shift(s_star), x).unwrap())
                    .collect();
                assert!(consistent_shifts(&f, &grid, &answers).len() <= g);
            }
        }
    }

    #[test]
    fn deterministic_is_deterministic() {
        let f = generate(InstanceParams::new(32, 64).unwrap(), GenKind::Random { seed: 5 })
            .unwrap();
        let mut o1 = make_oracle(&f, Shift(17)).unwrap();
        let r1 = find_shift_deterministic(&f, &mut o1).unwrap();
        let mut o2 = make_oracle(&f, Shift(17)).unwrap();
        let r2 = find_shift_deterministic(&f, &mut o2).unwrap();
        assert_eq!(r1.trace, r2.trace);
        assert_eq!(o1.query_log(), o2.query_log());
    }

    #[test]
    fn binary_search_worked_example() {
        let f = inst(2, 4, "10");
        let mut o = make_oracle(&f, Shift(1)).unwrap();
        let l = binary_search_pattern(&f, &mut o, 1).unwrap();
        assert_eq!(l, 1);
        assert_eq!(o.query_log(), &[2, 1]); // mids 2 then 1
    }

    #[test]
    fn binary_search_step_function() {
        // unique crossing: l = first_one - 1 - s*
        let p = InstanceParams::new(4, 9).unwrap();
        for pos in 4..=9 {
            let f = generate(p, GenKind::Step { position: pos }).unwrap();
            for s_star in 0..=4 {
                let mut o = make_oracle(&f, Shift(s_star)).unwrap();
                let l = binary_search_pattern(&f, &mut o, 1).unwrap();
                assert_eq!(l, f.first_one() - 1 - s_star);
            }
        }
    }

    #[test]
    fn binary_search_exit_invariant_all_gaps() {
        for f in all_instances(14) {
            for s_star in 0..=f.n() {
                for k in 1..=f.n() {
                    let mut o = make_oracle(&f, Shift(s_star)).unwrap();
                    let l = binary_search_pattern(&f, &mut o, k).unwrap();
                    assert!(!f.shifted_eval(Shift(s_star), l).unwrap(), "f={f} k={k}");
                    assert!(f.shifted_eval(Shift(s_star), l + k).unwrap(), "f={f} k={k}");
                }
            }
        }
    }

    #[test]
    fn candidate_location_examples() {
        let f = inst(2, 4, "10");
        let c = candidates_from_location(&f, 1, 1).unwrap();
        assert_eq!(c.shifts(), &[Shift(1)]);
        // step function: singleton for any location holding the crossing
        let step = inst(2, 4, "00");
        let c = candidates_from_location(&step, 1, 4).unwrap();
        assert_eq!(c.shifts(), &[Shift(0)]);
    }

    #[test]
    fn candidate_size_bounded_by_pattern_count() {
        for seed in 0..20u64 {
            let f = generate(InstanceParams::new(8, 20).unwrap(), GenKind::Random { seed })
                .unwrap();
            for k in 1..=8 {
                let bound = f.count_pattern(k).unwrap();
                for l in 0..=f.m() {
                    assert!(candidates_from_location(&f, k, l).unwrap().len() <= bound);
                }
            }
        }
    }

    #[test]
    fn elimination_pressure_small() {
        // |{r in [1,m] : F_s(r) != F_{s*}(r)}| >= count_pattern(f, |s-s*|)
        for f in all_instances(14) {
            for s_star in 0..=f.n() {
                for s in 0..=f.n() {
                    if s == s_star {
                        continue;
                    }
                    let differing = (1..=f.m())
                        .filter(|&r| {
                            f.shifted_eval(Shift(s), r).unwrap()
                                != f.shifted_eval(Shift(s_star), r).unwrap()
                        })
                        .count();
                    let k = s.abs_diff(s_star);
                    assert!(
                        differing >= f.count_pattern(k).unwrap(),
                        "f={f} s={s} s*={s_star}"
                    );
                }
            }
        }
    }

    #[test]
    fn elimination_pressure_worked_example() {
        let f = inst(2, 4, "10");
        let differing = (1..=4)
            .filter(|&r| f.shifted_eval(Shift(0), r).unwrap() != f.shifted_eval(Shift(1), r).unwrap())
            .count();
        assert_eq!(differing, 3);
        assert!(differing >= f.count_pattern(1).unwrap());
    }

    #[test]
    fn elimination_monte_carlo() {
        let f = generate(InstanceParams::new(64, 128).unwrap(), GenKind::Random { seed: 11 })
            .unwrap();
        let (_, t) = f.min_pattern_count();
        let mut successes = 0;
        for trial in 0..200u64 {
            let s_star = Shift((trial % 65) as usize);
            let mut o = make_oracle(&f, s_star).unwrap();
            let report = find_shift_random_elimination(&f, &mut o, t, 1000 + trial).unwrap();
            match report.answer {
                Answer::Found(s) => {
                    assert_eq!(s, s_star, "wrong answer is never allowed");
                    successes += 1;
                }
                Answer::Fail => {}
            }
        }
        assert!(successes >= 180, "successes = {successes}");
    }

    #[test]
    fn hybrid_step_instance_budget() {
        let p = InstanceParams::new(16, 48).unwrap();
        let f = generate(p, GenKind::Step { position: 30 }).unwrap();
        let budget = ((f.m() + 1) as f64).log2().ceil() as usize + 2;
        for s_star in 0..=16 {
            let mut o = with_budget(make_oracle(&f, Shift(s_star)).unwrap(), budget);
            let report = find_shift_hybrid(&f, &mut o, 9).unwrap();
            assert_eq!(report.answer, Answer::Found(Shift(s_star)));
        }
    }

    #[test]
    fn hybrid_never_wrong_exhaustive() {
        for f in all_instances(12) {
            for s_star in 0..=f.n() {
                for seed in 0..5u64 {
                    let mut o = make_oracle(&f, Shift(s_star)).unwrap();
                    let report = find_shift_hybrid(&f, &mut o, seed).unwrap();
                    if let Answer::Found(s) = report.answer {
                        assert_eq!(s, Shift(s_star), "f={f} seed={seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_reference() {
        for f in all_instances(12) {
            for s_star in 0..=f.n() {
                let mut o = make_oracle(&f, Shift(s_star)).unwrap();
                let report = brute_force_find_shift(&f, &mut o).unwrap();
                assert_eq!(report.answer, Answer::Found(Shift(s_star)));
                assert_eq!(report.queries, f.m() + 1);
            }
        }
    }
}
