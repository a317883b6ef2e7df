//! Sweep harnesses behind the `bench` and `protocol` CLI commands; rows
//! are plain structs so tests and acceptance checks can consume them
//! without going through CSV.

use crate::canonical::{generate, threshold_t, CanonicalFunction, GenKind, InstanceParams, Shift};
use crate::error::{Error, Result};
use crate::oracle::make_oracle;
use crate::protocol::{run_message_protocol, Strategy};
use crate::solve::{
    brute_force_find_shift, find_shift_deterministic, find_shift_hybrid,
    find_shift_random_elimination, Answer, SolveReport,
};
use crate::streaming::{derive_seed, CounterSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Deterministic,
    Hybrid,
    Elimination,
    BruteForce,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Deterministic => "det",
            Algorithm::Hybrid => "hybrid",
            Algorithm::Elimination => "elim",
            Algorithm::BruteForce => "brute",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "det" => Ok(Algorithm::Deterministic),
            "hybrid" => Ok(Algorithm::Hybrid),
            "elim" => Ok(Algorithm::Elimination),
            "brute" => Ok(Algorithm::BruteForce),
            _ => Err(Error::Domain(format!(
                "unknown algorithm {s:?} (expected det|hybrid|elim|brute)"
            ))),
        }
    }

    /// Run against a fresh oracle for `(f, s_star)`. The elimination
    /// threshold defaults to `threshold_t(n, m)` clamped to 1.
    pub fn solve(
        &self,
        f: &CanonicalFunction,
        s_star: Shift,
        seed: u64,
    ) -> Result<SolveReport> {
        let mut oracle = make_oracle(f, s_star)?;
        match self {
            Algorithm::Deterministic => find_shift_deterministic(f, &mut oracle),
            Algorithm::Hybrid => find_shift_hybrid(f, &mut oracle, seed),
            Algorithm::Elimination => {
                let t = threshold_t(f.n(), f.m()).unwrap_or(1);
                find_shift_random_elimination(f, &mut oracle, t, seed)
            }
            Algorithm::BruteForce => brute_force_find_shift(f, &mut oracle),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_list: Vec<usize>,
    /// Integer approximation factor; m = c * n.
    pub c: usize,
    pub algorithms: Vec<Algorithm>,
    /// Number of seeded trials per (n, algorithm) cell.
    pub seeds: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub s_star: usize,
    pub queries: usize,
    pub success: bool,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "algorithm,n,m,seed,s_star,queries,success";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.algorithm.name(),
            self.n,
            self.m,
            self.seed,
            self.s_star,
            self.queries,
            self.success
        )
    }
}

/// One random instance and hidden shift per (n, seed); every algorithm in
/// the config runs against its own fresh oracle.
pub fn bench_sweep(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    if config.c < 2 {
        return Err(Error::Domain("c must be at least 2".into()));
    }
    let mut cells = Vec::new();
    for &n in &config.n_list {
        for &alg in &config.algorithms {
            for seed_idx in 0..config.seeds {
                cells.push((n, alg, seed_idx as u64));
            }
        }
    }
    let mut rows = cells
        .par_iter()
        .map(|&(n, alg, seed_idx)| -> Result<BenchRow> {
            let m = n * config.c;
            let params = InstanceParams::new(n, m)?;
            let seed = derive_seed(config.base_seed, seed_idx);
            let f = generate(params, GenKind::Random { seed: derive_seed(seed, 0) })?;
            let s_star = Shift(ChaCha8Rng::seed_from_u64(derive_seed(seed, 1)).gen_range(0..=n));
            let report = alg.solve(&f, s_star, derive_seed(seed, 2))?;
            Ok(BenchRow {
                algorithm: alg,
                n,
                m,
                seed: seed_idx,
                s_star: s_star.value(),
                queries: report.queries,
                success: report.answer == Answer::Found(s_star),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.algorithm.name(), r.n, r.seed));
    Ok(rows)
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Mean query count per stream-size `m` for one algorithm, ready for a
/// scaling-law fit.
pub fn mean_queries_by_m(rows: &[BenchRow], algorithm: Algorithm) -> Vec<(f64, f64)> {
    let mut by_m: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
    for r in rows.iter().filter(|r| r.algorithm == algorithm) {
        let e = by_m.entry(r.m).or_default();
        e.0 += r.queries;
        e.1 += 1;
    }
    by_m
        .into_iter()
        .map(|(m, (total, count))| (m as f64, total as f64 / count as f64))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub counter: CounterSpec,
    pub strategy: Strategy,
    pub instance: CanonicalFunction,
    pub copies: usize,
    pub s_star: Shift,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ProtocolRow {
    pub strategy: String,
    pub counter: &'static str,
    pub n: usize,
    pub m: usize,
    pub copies: usize,
    pub seed: u64,
    pub s_star: usize,
    pub message_bits: usize,
    pub queries: usize,
    pub success: bool,
}

impl ProtocolRow {
    pub const CSV_HEADER: &'static str =
        "strategy,counter,n,m,copies,seed,s_star,message_bits,queries,success";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.strategy,
            self.counter,
            self.n,
            self.m,
            self.copies,
            self.seed,
            self.s_star,
            self.message_bits,
            self.queries,
            self.success
        )
    }
}

pub fn protocol_sweep(configs: &[ProtocolConfig]) -> Result<Vec<ProtocolRow>> {
    if configs.is_empty() {
        return Err(Error::Domain("protocol sweep needs at least one config".into()));
    }
    let mut rows = configs
        .par_iter()
        .map(|cfg| -> Result<ProtocolRow> {
            let factory = cfg.counter.factory(cfg.instance.params());
            let t = run_message_protocol(
                &factory,
                &cfg.instance,
                cfg.strategy,
                cfg.s_star,
                cfg.copies,
                cfg.seed,
            )?;
            Ok(ProtocolRow {
                strategy: cfg.strategy.name(),
                counter: cfg.counter.name(),
                n: cfg.instance.n(),
                m: cfg.instance.m(),
                copies: cfg.copies,
                seed: cfg.seed,
                s_star: t.alice_input.value(),
                message_bits: t.message_bits,
                queries: t.simulated_queries,
                success: t.success,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (&a.strategy, a.n, a.copies, a.seed, a.s_star).cmp(&(
            &b.strategy,
            b.n,
            b.copies,
            b.seed,
            b.s_star,
        ))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_row_count_and_determinism() {
        let config = BenchConfig {
            n_list: vec![16, 32],
            c: 2,
            algorithms: vec![Algorithm::Deterministic, Algorithm::BruteForce],
            seeds: 3,
            base_seed: 1,
        };
        let rows = bench_sweep(&config).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        let again = bench_sweep(&config).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.to_csv(), b.to_csv());
        }
        // brute force always costs exactly m + 1
        for r in rows.iter().filter(|r| r.algorithm == Algorithm::BruteForce) {
            assert_eq!(r.queries, r.m + 1);
            assert!(r.success);
        }
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| {
            let x = (1 << i) as f64;
            (x, 3.0 * x.sqrt())
        }).collect();
        let slope = log_log_slope(&pts);
        assert!((slope - 0.5).abs() < 1e-9);
    }

    #[test]
    fn protocol_sweep_single_row_matches_direct_run() {
        let params = InstanceParams::new(8, 16).unwrap();
        let f = generate(params, GenKind::Random { seed: 2 }).unwrap();
        let cfg = ProtocolConfig {
            counter: CounterSpec::Deterministic,
            strategy: Strategy::FullShift,
            instance: f.clone(),
            copies: 1,
            s_star: Shift(5),
            seed: 11,
        };
        let rows = protocol_sweep(std::slice::from_ref(&cfg)).unwrap();
        assert_eq!(rows.len(), 1);
        let factory = cfg.counter.factory(params);
        let direct =
            run_message_protocol(&factory, &f, cfg.strategy, cfg.s_star, cfg.copies, cfg.seed)
                .unwrap();
        assert_eq!(rows[0].message_bits, direct.message_bits);
        assert_eq!(rows[0].queries, direct.simulated_queries);
        assert_eq!(rows[0].success, direct.success);
        assert!(protocol_sweep(&[]).is_err());
    }
}
