mod lists;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use incomp::codes::{decode, encode, from_index, index_of, is_prefix_free, BitString, CodeLevel};
use incomp::commsim::{
    average_cost, best_coin_sequence, build_constant_protocol, build_trivial_ip_protocol, constant_family,
    random_family, trivial_family, xor_corrupt_family, CoinParameterizedProtocol, CostMode, MAX_EXHAUSTIVE_COST_N,
};
use incomp::descsys::{max_complexity_census, random_description_system, DescriptionSystem};
use incomp::harness::{
    commsim_report, lemma_rows, run_experiment, write_csv, write_csv_to, CommsimRow, DescsysRow, Experiment,
    ExperimentConfig, ExperimentSummary, HarnessError,
};
use incomp::majority::{worst_case_scan, TournamentMode};
use incomp::matmul::{find_witness, matmul_witness_decode, matmul_witness_encode, plant_instance, random_pair};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    /// Bad flags or malformed input.
    #[error("{0}")]
    Usage(String),
    /// A checked property did not hold.
    #[error("check failed: {0}")]
    Failed(String),
    /// Anything else that stopped the run.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "incomp",
    version,
    about = "Incompressibility experiments: codes, description systems, matrix product, majority, protocols"
)]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV and JSON outputs given by relative paths.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Experiment configuration (`key = value` lines, TOML syntax).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Self-delimiting codes.
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Finite description systems.
    #[command(subcommand)]
    Descsys(DescsysCmd),
    /// Boolean matrix multiplication.
    #[command(subcommand)]
    Matmul(MatmulCmd),
    /// Majority by tournament.
    #[command(subcommand)]
    Majority(MajorityCmd),
    /// Inner-product protocols.
    #[command(subcommand)]
    Commsim(CommsimCmd),
    /// Run an experiment from `--config` or flags.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum CodesCmd {
    /// Print `E_level(x)`.
    Encode {
        #[arg(long)]
        level: u8,
        /// Bit string, or a natural number with `--int`; read from stdin when absent.
        #[arg(long)]
        input: Option<String>,
        /// Read the input as a natural number.
        #[arg(long)]
        int: bool,
    },
    /// Decode one codeword from the front of the input; prints the value, then any remainder.
    Decode {
        #[arg(long)]
        level: u8,
        #[arg(long)]
        input: Option<String>,
        /// Print the decoded string as a natural number.
        #[arg(long)]
        int: bool,
    },
    /// Check round trips and prefix-freeness over all strings up to a length.
    CheckPrefix {
        #[arg(long)]
        max_len: usize,
        /// Levels to check.
        #[arg(long, value_parser = lists::u32_list, default_value = "0..3")]
        levels: lists::U32List,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemKind {
    /// Random system covering every string within `l(x) + c`.
    Bounded,
    /// Random system with no covering guarantee.
    Random,
    /// `D(p) = p`.
    Identity,
}

#[derive(Subcommand)]
enum DescsysCmd {
    /// Check the counting lemma on random systems; CSV rows then a verdict line.
    CheckLemma {
        /// Program length bound.
        #[arg(long = "L", default_value_t = 12)]
        program_len: usize,
        /// The set checked is every string of this length.
        #[arg(long, default_value_t = 8)]
        universe: usize,
        #[arg(long, value_parser = lists::u32_list, default_value = "1..6")]
        c: lists::U32List,
        #[arg(long, default_value_t = 1000)]
        systems: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count maximal-complexity strings of one length; prints JSON.
    Census {
        #[arg(long = "L", default_value_t = 12)]
        program_len: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        c: usize,
        #[arg(long, value_enum, default_value_t = SystemKind::Bounded)]
        system: SystemKind,
    },
}

#[derive(Subcommand)]
enum MatmulCmd {
    /// Probe counts of the row-list multiply on seeded instances.
    Bench {
        #[arg(long, value_parser = lists::usize_list, default_value = "64,128,256,512")]
        n: lists::UsizeList,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value = "matmul.csv")]
        out: PathBuf,
        /// Record wall-clock time per trial.
        #[arg(long)]
        wallclock: bool,
    },
    /// Encode an instance through a long search and compare its length to `2n² − log₂ n`.
    Witness {
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Plant a witness at search (0, 0) instead of looking for one.
        #[arg(long)]
        plant: bool,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

#[derive(Subcommand)]
enum MajorityCmd {
    /// Comparison counts on seeded strings.
    Bench {
        #[arg(long, value_parser = lists::usize_list, default_value = "1024,4096,16384")]
        n: lists::UsizeList,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value = "corrected")]
        mode: TournamentMode,
        #[arg(long, default_value = "majority.csv")]
        out: PathBuf,
    },
    /// Exhaustive maximum comparisons for every length up to `max-n`; CSV to stdout.
    Worstcase {
        #[arg(long, default_value_t = 18)]
        max_n: usize,
        #[arg(long, default_value = "corrected")]
        mode: TournamentMode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolKind {
    Trivial,
    Zero,
    One,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    XorCorrupt,
    Trivial,
    Constant,
    Random,
}

#[derive(Subcommand)]
enum CommsimCmd {
    /// Describe and reconstruct inputs of the one-way protocol.
    Verify {
        #[arg(long)]
        n: usize,
        /// Seeded inputs checked when `n` is too large to enumerate.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Per-input CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean transcript length under uniform inputs.
    Avgcost {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ProtocolKind::Trivial)]
        protocol: ProtocolKind,
        /// Inputs sampled above the exhaustive limit.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Scan every coin string of a private-coin family.
    Coins {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Coin bits per party (ignored by xor-corrupt).
        #[arg(long, default_value_t = 1)]
        coins: usize,
        /// Tree depth for the random family.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment name; required without `--config`.
    #[arg(long)]
    experiment: Option<Experiment>,
    #[arg(long, value_parser = lists::usize_list)]
    sizes: Option<lists::UsizeList>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Settings shared by all subcommands after merging flags over the config file.
struct Context {
    seed: u64,
    workers: usize,
    out_dir: Option<PathBuf>,
    config: Option<ExperimentConfig>,
}

impl Context {
    fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let config = cli.config.as_deref().map(ExperimentConfig::load).transpose().map_err(usage)?;
        let seed = cli.seed.or(config.as_ref().map(|c| c.master_seed)).unwrap_or(0);
        let workers = cli.workers.or(config.as_ref().map(|c| c.workers)).unwrap_or(1);
        if workers == 0 {
            return Err(usage("--workers must be positive"));
        }
        Ok(Self { seed, workers, out_dir: cli.out_dir.clone(), config })
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn experiment(&self, experiment: Experiment, sizes: Vec<usize>, trials: u64, out: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(experiment, sizes, trials, self.seed, self.resolve(out));
        cfg.workers = self.workers;
        cfg
    }
}

/// Writes a line to stdout; a closed pipe ends output quietly.
fn emit(line: impl std::fmt::Display) -> CliResult {
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(runtime(e)),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    emit(serde_json::to_string_pretty(value).map_err(runtime)?)
}

fn read_input(input: Option<String>) -> Result<String, CliError> {
    match input {
        Some(s) => Ok(s),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(runtime)?;
            Ok(s)
        }
    }
}

fn parse_bits(text: &str) -> Result<BitString, CliError> {
    text.trim().parse().map_err(usage)
}

fn level(l: u8) -> Result<CodeLevel, CliError> {
    CodeLevel::new(l).map_err(usage)
}

fn run_codes(cmd: CodesCmd) -> CliResult {
    match cmd {
        CodesCmd::Encode { level: l, input, int } => {
            let text = read_input(input)?;
            let x = if int { from_index(text.trim().parse::<u64>().map_err(usage)?) } else { parse_bits(&text)? };
            emit(encode(level(l)?, &x).map_err(usage)?)?;
        }
        CodesCmd::Decode { level: l, input, int } => {
            let (x, rest) = decode(level(l)?, &parse_bits(&read_input(input)?)?).map_err(usage)?;
            match (int, index_of(&x)) {
                (true, Some(v)) => emit(v)?,
                (true, None) => return Err(usage("decoded string is too long to print as an integer")),
                (false, _) => emit(x)?,
            }
            if !rest.is_empty() {
                emit(rest)?;
            }
        }
        CodesCmd::CheckPrefix { max_len, levels } => {
            let strings: Vec<BitString> = BitString::all_up_to(max_len).collect();
            let suffix: BitString = "01".parse().expect("literal");
            let mut failed = Vec::new();
            for l in levels {
                let lv = level(u8::try_from(l).map_err(usage)?)?;
                let mut round_trip_failures = 0;
                let mut words = Vec::with_capacity(strings.len());
                for x in &strings {
                    let w = encode(lv, x).map_err(runtime)?;
                    if !matches!(decode(lv, &w.concat(&suffix)), Ok((ref y, ref r)) if y == x && *r == suffix) {
                        round_trip_failures += 1;
                    }
                    words.push(w);
                }
                let verdict = is_prefix_free(words.iter());
                emit(format_args!(
                    "E_{l}: {} codewords, round-trip failures {round_trip_failures}, {}",
                    words.len(),
                    if verdict.is_prefix_free() { "prefix-free".to_string() } else { format!("{verdict:?}") }
                ))?;
                if round_trip_failures > 0 || !verdict.is_prefix_free() {
                    failed.push(format!("E_{l}"));
                }
            }
            if !failed.is_empty() {
                return Err(CliError::Failed(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn run_descsys(ctx: &Context, cmd: DescsysCmd) -> CliResult {
    match cmd {
        DescsysCmd::CheckLemma { program_len, universe, c, systems, out } => {
            let rows = lemma_rows(program_len, universe, &c, systems, ctx.seed).map_err(usage)?;
            match out {
                Some(p) => write_csv(&ctx.resolve(&p), &rows, DescsysRow::HEADER).map_err(runtime)?,
                None => write_csv_to(std::io::stdout().lock(), &rows, DescsysRow::HEADER).map_err(runtime)?,
            }
            let failures = rows.iter().filter(|r| !r.holds).count();
            let verdict = if failures == 0 { "PASS" } else { "FAIL" };
            emit(format_args!("verdict: {verdict} ({} of {} cases hold)", rows.len() - failures, rows.len()))?;
            if failures > 0 {
                return Err(CliError::Failed(format!("{failures} lemma cases")));
            }
        }
        DescsysCmd::Census { program_len, n, c, system } => {
            let d = match system {
                SystemKind::Bounded => random_description_system(program_len, n, Some(c), ctx.seed),
                SystemKind::Random => random_description_system(program_len, n, None, ctx.seed),
                SystemKind::Identity => DescriptionSystem::identity(program_len),
            }
            .map_err(usage)?;
            let report = max_complexity_census(&d, n, c).map_err(usage)?;
            print_json(&report)?;
            if report.bound_holds == Some(false) {
                return Err(CliError::Failed(format!(
                    "{} strings at complexity >= n, bound {}",
                    report.count_ge_n, report.bound
                )));
            }
        }
    }
    Ok(())
}

fn report_experiment(cfg: &ExperimentConfig) -> CliResult {
    let outcome = run_experiment(cfg).map_err(|e| match e {
        HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::Json(_) => runtime(e),
        other => usage(other),
    })?;
    eprintln!("wrote {} and {}", outcome.csv_path.display(), outcome.summary_path.display());
    print_json(&outcome.summary)?;
    check_summary(&outcome.summary)
}

fn check_summary(s: &ExperimentSummary) -> CliResult {
    if s.failures > 0 {
        return Err(CliError::Failed(format!("{} of {} rows of {}", s.failures, s.rows, s.experiment.name())));
    }
    Ok(())
}

#[derive(Serialize)]
struct WitnessReport {
    n: usize,
    search: Option<(usize, usize)>,
    description_len: Option<usize>,
    omitted: Option<usize>,
    bound: f64,
    round_trip: Option<bool>,
    below_bound: Option<bool>,
}

fn run_matmul(ctx: &Context, cmd: MatmulCmd) -> CliResult {
    match cmd {
        MatmulCmd::Bench { n, trials, out, wallclock } => {
            let mut cfg = ctx.experiment(Experiment::MatmulBench, n, trials, &out);
            cfg.wallclock = wallclock;
            report_experiment(&cfg)
        }
        MatmulCmd::Witness { n, plant, trial } => {
            if n < 2 {
                return Err(usage("--n must be at least 2"));
            }
            let (a, b, search) = if plant {
                let (a, b) = plant_instance(n, ctx.seed, trial, 0, 0);
                (a, b, Some((0, 0)))
            } else {
                let (a, b) = random_pair(n, ctx.seed, trial);
                let found = find_witness(&a, &b).map_err(runtime)?;
                (a, b, found)
            };
            let bound = 2.0 * (n * n) as f64 - (n as f64).log2();
            let mut report = WitnessReport {
                n,
                search,
                description_len: None,
                omitted: None,
                bound,
                round_trip: None,
                below_bound: None,
            };
            if let Some((i, j)) = search {
                let d = matmul_witness_encode(&a, &b, i, j).map_err(runtime)?;
                let round_trip = matmul_witness_decode(&d, n).map_err(runtime)? == (a, b);
                report.description_len = Some(d.len());
                report.omitted = Some(d.omitted);
                report.round_trip = Some(round_trip);
                report.below_bound = Some((d.len() as f64) < bound);
            }
            print_json(&report)?;
            match (report.round_trip, report.below_bound) {
                (Some(false), _) => Err(CliError::Failed("witness round trip".into())),
                (_, Some(false)) => Err(CliError::Failed("description not shorter than the bound".into())),
                _ => Ok(()),
            }
        }
    }
}

fn run_majority(ctx: &Context, cmd: MajorityCmd) -> CliResult {
    match cmd {
        MajorityCmd::Bench { n, trials, mode, out } => {
            let mut cfg = ctx.experiment(Experiment::MajorityBench, n, trials, &out);
            cfg.mode = mode;
            report_experiment(&cfg)
        }
        MajorityCmd::Worstcase { max_n, mode } => {
            let scans = (1..=max_n).map(|n| worst_case_scan(n, mode)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
            emit("n,max_comparisons,reference,matches_reference,argmax_input")?;
            for w in &scans {
                emit(format_args!(
                    "{},{},{},{},{}",
                    w.n, w.max_comparisons, w.reference, w.matches_reference, w.argmax_input
                ))?;
            }
            let off: Vec<String> = scans.iter().filter(|w| !w.matches_reference).map(|w| w.n.to_string()).collect();
            // Only the corrected tournament is claimed to meet n − ν(n) exactly.
            if mode == TournamentMode::Corrected && !off.is_empty() {
                return Err(CliError::Failed(format!("worst case differs from n - nu(n) at n = {}", off.join(", "))));
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CommsimJson {
    n: usize,
    checks_run: u64,
    failures: u64,
    mean_cost: f64,
    min_coin_error: Option<f64>,
}

fn run_commsim(ctx: &Context, cmd: CommsimCmd) -> CliResult {
    let report = match cmd {
        CommsimCmd::Verify { n, samples, out } => {
            let (rows, rep) = commsim_report(n, samples, ctx.seed, ctx.workers).map_err(usage)?;
            if let Some(out) = out {
                write_csv(&ctx.resolve(&out), &rows, CommsimRow::HEADER).map_err(runtime)?;
            }
            CommsimJson {
                n: rep.n,
                checks_run: rep.checks_run,
                failures: rep.failures,
                mean_cost: rep.mean_cost,
                min_coin_error: rep.min_coin_error,
            }
        }
        CommsimCmd::Avgcost { n, protocol, samples } => {
            let p = match protocol {
                ProtocolKind::Trivial => build_trivial_ip_protocol(n),
                ProtocolKind::Zero => build_constant_protocol(n, false),
                ProtocolKind::One => build_constant_protocol(n, true),
            }
            .map_err(usage)?;
            let mode = if n <= MAX_EXHAUSTIVE_COST_N {
                CostMode::Exhaustive
            } else {
                CostMode::Sampled { trials: samples, seed: ctx.seed }
            };
            let r = average_cost(&p, mode).map_err(usage)?;
            let wrong = ((1.0 - r.correct_fraction) * r.samples as f64).round() as u64;
            CommsimJson { n, checks_run: r.samples, failures: wrong, mean_cost: r.mean, min_coin_error: None }
        }
        CommsimCmd::Coins { family, n, coins, depth } => {
            let f: CoinParameterizedProtocol = match family {
                Family::XorCorrupt => xor_corrupt_family(n),
                Family::Trivial => trivial_family(n, coins),
                Family::Constant => constant_family(n, false, coins),
                Family::Random => random_family(n, coins, coins, depth, ctx.seed),
            };
            let rep = best_coin_sequence(&f, ctx.workers).map_err(usage)?;
            let best = f.fix(&rep.best_coins).map_err(runtime)?;
            let mean_cost = if n <= MAX_EXHAUSTIVE_COST_N {
                average_cost(&best, CostMode::Exhaustive).map_err(runtime)?.mean
            } else {
                average_cost(&best, CostMode::Sampled { trials: 100_000, seed: ctx.seed }).map_err(runtime)?.mean
            };
            CommsimJson {
                n,
                checks_run: 1 << f.coin_len(),
                failures: u64::from(!rep.pigeonhole_holds),
                mean_cost,
                min_coin_error: Some(*rep.best_error.numer() as f64 / *rep.best_error.denom() as f64),
            }
        }
    };
    print_json(&report)?;
    if report.failures > 0 {
        return Err(CliError::Failed(format!("{} failed checks", report.failures)));
    }
    Ok(())
}

fn run_bench(ctx: &Context, args: BenchArgs) -> CliResult {
    let mut cfg = match (&ctx.config, args.experiment) {
        (Some(c), None) => c.clone(),
        (Some(c), Some(e)) => ExperimentConfig { experiment: e, ..c.clone() },
        (None, Some(e)) => {
            let sizes = args.sizes.clone().ok_or_else(|| usage("--sizes is required without --config"))?;
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", e.name())));
            ExperimentConfig::new(e, sizes, args.trials.unwrap_or(1), ctx.seed, out)
        }
        (None, None) => return Err(usage("give --config or --experiment")),
    };
    if let Some(s) = args.sizes {
        cfg.sizes = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(o) = args.out {
        cfg.output = o;
    }
    cfg.master_seed = ctx.seed;
    cfg.workers = ctx.workers;
    cfg.output = ctx.resolve(&cfg.output);
    report_experiment(&cfg)
}

fn run(cli: Cli) -> CliResult {
    let ctx = Context::from_cli(&cli)?;
    match cli.command {
        Command::Codes(cmd) => run_codes(cmd),
        Command::Descsys(cmd) => run_descsys(&ctx, cmd),
        Command::Matmul(cmd) => run_matmul(&ctx, cmd),
        Command::Majority(cmd) => run_majority(&ctx, cmd),
        Command::Commsim(cmd) => run_commsim(&ctx, cmd),
        Command::Bench(args) => run_bench(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("incomp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
