use clap::{Args, Parser, Subcommand};
use shiftfind::bench::{bench_sweep, Algorithm, BenchConfig, BenchRow, ProtocolConfig, ProtocolRow};
use shiftfind::protocol::Strategy;
use shiftfind::streaming::{amplify, empirical_canonical, CounterSpec};
use shiftfind::{
    generate, CanonicalFunction, Error, GenKind, InstanceParams, Result, Shift,
};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_FAIL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "shiftfind", about = "Shift finding and streaming-counter experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run one solver against a hidden shift.
    Solve(SolveArgs),
    /// Sweep query counts over a size grid, emitting CSV.
    Bench(BenchArgs),
    /// Estimate a counter's canonical function and check pseudo-determinism.
    PdCheck(PdCheckArgs),
    /// Simulate the one-way message protocol, emitting CSV.
    Protocol(ProtocolArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Explicit pattern bits (01-string of length m-n).
    #[arg(long, conflicts_with_all = ["random", "step", "periodic"])]
    pattern: Option<String>,
    /// Seeded random pattern; requires --seed.
    #[arg(long, conflicts_with_all = ["step", "periodic"])]
    random: bool,
    /// Step instance: F stays 0 through this position.
    #[arg(long, conflicts_with = "periodic")]
    step: Option<usize>,
    /// Alternating zero/one blocks of this period.
    #[arg(long)]
    periodic: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// The hidden shift the oracle is loaded with.
    #[arg(long)]
    shift: usize,
    #[arg(long, default_value = "det")]
    algorithm: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated list of n values.
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Integer approximation factor; m = c * n.
    #[arg(long, default_value_t = 2)]
    c: usize,
    /// Comma-separated algorithms (det|hybrid|elim|brute).
    #[arg(long, value_delimiter = ',', default_value = "det,brute")]
    algorithms: Vec<String>,
    /// Seeded trials per (n, algorithm) cell.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PdCheckArgs {
    /// Counter construction (det|morris).
    #[arg(long, default_value = "det")]
    counter: String,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 99)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Amplification copies (odd); 1 disables amplification.
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "det")]
    counter: String,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// full_shift, or bucket:<k>.
    #[arg(long, default_value = "full_shift")]
    strategy: String,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[arg(long)]
    seed: u64,
    /// Seeded repetitions per shift value.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Run a single shift instead of all of [0, n].
    #[arg(long)]
    shift: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(short)]
    output: Option<PathBuf>,
}

fn parse_counter(name: &str, epsilon: f64) -> Result<CounterSpec> {
    match name {
        "det" => Ok(CounterSpec::Deterministic),
        "morris" => {
            if epsilon <= 0.0 {
                return Err(Error::Domain("epsilon must be positive".into()));
            }
            Ok(CounterSpec::Morris { epsilon })
        }
        _ => Err(Error::Domain(format!("unknown counter {name:?} (expected det|morris)"))),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    if s == "full_shift" {
        return Ok(Strategy::FullShift);
    }
    if let Some(k) = s.strip_prefix("bucket:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Domain(format!("bad bucket gap in strategy {s:?}")))?;
        return Ok(Strategy::Bucket { k });
    }
    Err(Error::Domain(format!(
        "unknown strategy {s:?} (expected full_shift or bucket:<k>)"
    )))
}

fn configure_jobs(jobs: Option<usize>) {
    if let Some(jobs) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<u8> {
    let params = InstanceParams::new(args.n, args.m)?;
    let kind = if let Some(bits) = &args.pattern {
        GenKind::Explicit { bits: bits.clone() }
    } else if args.random {
        let seed = args
            .seed
            .ok_or_else(|| Error::Domain("--random requires --seed".into()))?;
        GenKind::Random { seed }
    } else if let Some(position) = args.step {
        GenKind::Step { position }
    } else if let Some(period) = args.periodic {
        GenKind::Periodic { period }
    } else {
        return Err(Error::Domain(
            "one of --pattern, --random, --step, --periodic is required".into(),
        ));
    };
    let f = generate(params, kind)?;
    write_output(&args.output, &format!("{}\n", f.to_json()))?;
    Ok(EXIT_OK)
}

fn load_instance(path: &PathBuf) -> Result<CanonicalFunction> {
    CanonicalFunction::from_json(&fs::read_to_string(path)?)
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let f = load_instance(&args.instance)?;
    if args.shift > f.n() {
        return Err(Error::Domain(format!("shift {} outside [0, {}]", args.shift, f.n())));
    }
    let algorithm = Algorithm::parse(&args.algorithm)?;
    let s_star = Shift(args.shift);
    let report = algorithm.solve(&f, s_star, args.seed)?;
    let (answer_str, answer_json) = match report.answer.shift() {
        Some(s) => (s.to_string(), s.value().to_string()),
        None => ("FAIL".into(), "null".into()),
    };
    println!("method:  {}", report.method);
    println!("answer:  {answer_str}");
    println!("queries: {}", report.queries);
    println!(
        "{{\"method\":\"{}\",\"answer\":{},\"queries\":{},\"seed\":{}}}",
        report.method, answer_json, report.queries, args.seed
    );
    Ok(match report.answer.shift() {
        Some(s) if s == s_star => EXIT_OK,
        Some(_) => EXIT_VIOLATION,
        None => EXIT_FAIL,
    })
}

fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    configure_jobs(args.jobs);
    let algorithms = args
        .algorithms
        .iter()
        .map(|s| Algorithm::parse(s))
        .collect::<Result<Vec<_>>>()?;
    if args.n_list.is_empty() {
        return Err(Error::Domain("--n-list must not be empty".into()));
    }
    let config = BenchConfig {
        n_list: args.n_list.clone(),
        c: args.c,
        algorithms,
        seeds: args.seeds,
        base_seed: args.seed,
    };
    let rows = bench_sweep(&config)?;
    let mut csv = String::from(BenchRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    write_output(&args.output, &csv)?;
    Ok(EXIT_OK)
}

fn cmd_pd_check(args: &PdCheckArgs) -> Result<u8> {
    configure_jobs(args.jobs);
    let params = InstanceParams::new(args.n, args.m)?;
    let spec = parse_counter(&args.counter, args.epsilon)?;
    let copies = args.copies;
    let ec = if copies == 1 {
        empirical_canonical(&spec.factory(params), params, args.trials, args.seed)?
    } else {
        let amp_factory = move |seed: u64| -> Box<dyn shiftfind::StreamCounter> {
            Box::new(
                amplify(&spec.factory(params), copies, seed)
                    .expect("copies validated before the sweep"),
            )
        };
        if copies.is_multiple_of(2) {
            return Err(Error::Domain("--copies must be odd".into()));
        }
        empirical_canonical(&amp_factory, params, args.trials, args.seed)?
    };
    let min_margin = ec.min_margin();
    let below = ec.lengths_below(0.9);
    println!("counter:     {}", spec.name());
    println!("copies:      {copies}");
    println!("trials:      {}", ec.trials_per_length);
    println!("min margin:  {min_margin:.4}");
    println!("lengths with margin < 0.9: {}", below.len());
    if !below.is_empty() {
        let shown: Vec<String> = below.iter().take(16).map(|l| l.to_string()).collect();
        println!("  e.g. {}", shown.join(","));
    }
    println!("promise violations: {}", ec.violations.len());
    Ok(if min_margin >= 0.9 { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_protocol(args: &ProtocolArgs) -> Result<u8> {
    configure_jobs(args.jobs);
    let f = load_instance(&args.instance)?;
    let spec = parse_counter(&args.counter, args.epsilon)?;
    let strategy = parse_strategy(&args.strategy)?;
    let shifts: Vec<usize> = match args.shift {
        Some(s) if s <= f.n() => vec![s],
        Some(s) => {
            return Err(Error::Domain(format!("shift {s} outside [0, {}]", f.n())));
        }
        None => (0..=f.n()).collect(),
    };
    let mut configs = Vec::new();
    for &s in &shifts {
        for trial in 0..args.trials {
            configs.push(ProtocolConfig {
                counter: spec,
                strategy,
                instance: f.clone(),
                copies: args.copies,
                s_star: Shift(s),
                seed: shiftfind::streaming::derive_seed(args.seed, trial as u64),
            });
        }
    }
    let rows = shiftfind::bench::protocol_sweep(&configs)?;
    let mut csv = String::from(ProtocolRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    write_output(&args.output, &csv)?;
    Ok(EXIT_OK)
}

fn run() -> Result<u8> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not a usage error
            if e.use_stderr() {
                eprint!("{e}");
                return Ok(EXIT_USAGE);
            }
            print!("{e}");
            return Ok(EXIT_OK);
        }
    };
    match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::PdCheck(args) => cmd_pd_check(args),
        Command::Protocol(args) => cmd_protocol(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(Error::Domain(msg)) | Err(Error::Instance(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VIOLATION)
        }
    }
}
