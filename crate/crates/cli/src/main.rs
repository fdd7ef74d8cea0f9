//! `pgm`: generate datasets, build and query indexes, benchmark and tune.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or format error,
//! 3 infeasible tuning budget.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pgm_core::bench::{run_bench, BenchOptions, Contender, QueryDist, QueryKind, StructureSpec, Workload};
use pgm_core::dataset::{gen_dataset, parse_weighted_text, AnyDataset, Dataset, GenKind, DEFAULT_SEED};
use pgm_core::dist_aware::{build_distribution_aware, QueryDistribution};
use pgm_core::index::read_header;
use pgm_core::tuner::{
    calibrate_latency, default_interval, minimize_space, minimize_time, page_interval, CostModel, ModelTimer,
    SearchPolicy, SpaceRequest, TimeRequest, TunerResult, WallClockTimer,
};
use pgm_core::{Error, IndexConfig, Key, KeyType, PgmIndex, PgmModel, QueryResult, Router};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "pgm", version, about = "Learned indexes over sorted keys")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Convert a user-supplied sorted key file into the binary dataset format.
    Ingest(IngestArgs),
    /// Build an index over a dataset and write it to disk.
    Build(BuildArgs),
    /// Answer queries with a stored index.
    Query(QueryArgs),
    /// Benchmark indexes and baselines on a generated workload.
    Bench(BenchArgs),
    /// Choose epsilon under a space or time budget.
    Tune(TuneArgs),
    /// Print the statistics of a stored index.
    Inspect(InspectArgs),
    /// Measure the per-step search latency and write a calibration file.
    Calibrate(CalibrateArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum DataFormat {
    Binary,
    Text,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum KeyTypeArg {
    U64,
    F64,
}

impl From<KeyTypeArg> for KeyType {
    fn from(k: KeyTypeArg) -> Self {
        match k {
            KeyTypeArg::U64 => KeyType::U64,
            KeyTypeArg::F64 => KeyType::F64,
        }
    }
}

#[derive(Args)]
struct SeedArg {
    /// Random seed.
    #[arg(long, env = "PGM_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    /// uniform_gaps, zipf_gaps, piecewise_linear or lognormal_gaps.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    /// Linear runs for piecewise_linear.
    #[arg(long, default_value_t = 1)]
    segments: usize,
    /// Maximum rank displacement for piecewise_linear.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Bytes of random payload per key.
    #[arg(long, default_value_t = 0)]
    payload_size: u16,
    #[arg(long, value_enum, default_value_t = DataFormat::Binary)]
    format: DataFormat,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Key type of text input. Binary input carries its own.
    #[arg(long, value_enum, default_value_t = KeyTypeArg::U64)]
    key_type: KeyTypeArg,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DataArg {
    /// Dataset file, binary or text.
    #[arg(long)]
    data: PathBuf,
    /// Key type when the dataset is text.
    #[arg(long, value_enum, default_value_t = KeyTypeArg::U64)]
    key_type: KeyTypeArg,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum RouterArg {
    Recursive,
    Binary,
    Multiway,
    DistAware,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    data: DataArg,
    #[arg(long, default_value_t = 64)]
    eps: u32,
    #[arg(long, default_value_t = 4)]
    eps_internal: u32,
    #[arg(long, value_enum, default_value_t = RouterArg::Recursive)]
    router: RouterArg,
    /// Multiway fanout; defaults to twice eps-internal.
    #[arg(long)]
    fanout: Option<u32>,
    /// `key<TAB>weight` file for the distribution-aware router. Keys absent
    /// from it get the smallest weight.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum KindArg {
    Lookup,
    Predecessor,
    Successor,
    Range,
}

impl From<KindArg> for QueryKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lookup => QueryKind::Lookup,
            KindArg::Predecessor => QueryKind::Predecessor,
            KindArg::Successor => QueryKind::Successor,
            KindArg::Range => QueryKind::Range,
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    data: DataArg,
    #[arg(long)]
    index: PathBuf,
    /// Query key. Repeatable.
    #[arg(long = "key")]
    keys: Vec<String>,
    /// File with one query key per line.
    #[arg(long)]
    keys_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KindArg::Lookup)]
    kind: KindArg,
    /// Upper end for range queries.
    #[arg(long)]
    hi: Option<String>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArg,
    /// Epsilon values for the PGM indexes.
    #[arg(long, value_delimiter = ',', default_values_t = [64u32])]
    eps: Vec<u32>,
    #[arg(long, default_value_t = 4)]
    eps_internal: u32,
    /// Node size of the multiway baseline, in bytes.
    #[arg(long, default_value_t = 128)]
    node_bytes: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Lookup)]
    kind: KindArg,
    /// `uniform`, `zipf:<exponent>` or `file:<path>`.
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = 100_000)]
    queries: usize,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// Threads sharing each timed batch.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Report file; standard output if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ModeArg {
    Time,
    Space,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum TimerArg {
    Wall,
    Model,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArg,
    /// `time` minimizes query time under --space-budget; `space` minimizes
    /// space under --time-budget-ns.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Bytes.
    #[arg(long)]
    space_budget: Option<u64>,
    /// Nanoseconds per query.
    #[arg(long)]
    time_budget_ns: Option<f64>,
    /// Tolerance in the budget's unit (bytes or nanoseconds).
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    #[arg(long)]
    eps_min: Option<u64>,
    #[arg(long)]
    eps_max: Option<u64>,
    /// Page size in keys; also narrows the interval to [B/2, n/2].
    #[arg(long)]
    page_size: Option<u64>,
    /// key=value file with latency_c_ns and page_size_keys.
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TimerArg::Wall)]
    timer: TimerArg,
    /// Plain bisection without power-law guesses.
    #[arg(long)]
    plain_binary: bool,
    /// Write the per-build trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 1 << 24)]
    array_len: usize,
    #[arg(long, default_value_t = 1_000_000)]
    searches: usize,
    #[arg(long, default_value_t = 8)]
    page_size: u64,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Infeasible(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InfeasibleSpace { .. } | Error::InfeasibleTime { .. } => Failure::Infeasible(msg),
            Error::EpsilonOutOfRange(_)
            | Error::InvalidFanout(_)
            | Error::UnknownKind(_)
            | Error::InvalidRequest(_)
            | Error::EmptyFamily
            | Error::OracleSizeLimit { .. } => Failure::Usage(msg),
            _ => Failure::Data(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_dataset(arg: &DataArg) -> Result<AnyDataset, Failure> {
    let bytes = read_file(&arg.data)?;
    AnyDataset::load(&bytes, arg.key_type.into()).map_err(|e| Failure::Data(format!("{}: {e}", arg.data.display())))
}

fn parse_key<K: Key>(s: &str) -> Result<K, Failure> {
    let k: K = s
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("invalid key {s:?}")))?;
    if !k.is_valid() {
        return Err(Failure::Usage(format!("invalid key {s:?}")));
    }
    Ok(k)
}

/// Writes rows as CSV with a header, or as JSON lines.
fn emit<T: Serialize>(out: &mut dyn Write, format: OutFormat, rows: &[T]) -> CmdResult {
    match format {
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutFormat::Json => {
            for r in rows {
                serde_json::to_writer(&mut *out, r)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let kind = GenKind::parse(&a.kind, a.segments, a.noise)?;
    let mut d = gen_dataset(kind, a.n, a.seed.seed)?;
    if a.payload_size > 0 {
        if a.format == DataFormat::Text {
            return Err(Failure::Usage("payloads need the binary format".into()));
        }
        d = d.with_random_payloads(a.payload_size, a.seed.seed);
    }
    match a.format {
        DataFormat::Binary => write_file(&a.output, &d.to_bytes()),
        DataFormat::Text => write_file(&a.output, d.to_text().as_bytes()),
    }
}

fn cmd_ingest(a: IngestArgs) -> CmdResult {
    let bytes = read_file(&a.input)?;
    let d = AnyDataset::load(&bytes, a.key_type.into())
        .map_err(|e| Failure::Data(format!("{}: {e}", a.input.display())))?;
    write_file(&a.output, &d.to_bytes())
}

fn cmd_build(a: BuildArgs) -> CmdResult {
    match load_dataset(&a.data)? {
        AnyDataset::U64(d) => build_typed(&a, d),
        AnyDataset::F64(d) => build_typed(&a, d),
    }
}

fn build_typed<K: Key>(a: &BuildArgs, d: Dataset<K>) -> CmdResult {
    if a.weights.is_some() && a.router != RouterArg::DistAware {
        return Err(Failure::Usage("--weights needs --router dist-aware".into()));
    }
    let bytes = match a.router {
        RouterArg::DistAware => {
            let path = a
                .weights
                .as_ref()
                .ok_or_else(|| Failure::Usage("--router dist-aware needs --weights".into()))?;
            let dist = aligned_distribution(&d.keys, path)?;
            build_distribution_aware(&dist, a.eps)?.serialize()
        }
        r => {
            let router = match r {
                RouterArg::Recursive => Router::Recursive,
                RouterArg::Binary => Router::Binary,
                _ => Router::Multiway {
                    fanout: a.fanout.unwrap_or(IndexConfig::default_fanout(a.eps_internal)),
                },
            };
            let cfg = IndexConfig {
                eps_last: a.eps,
                eps_internal: a.eps_internal,
                router,
            };
            PgmModel::build(&d.keys, &cfg)?.serialize()
        }
    };
    write_file(&a.output, &bytes)
}

/// Weights from `path` laid over the dataset keys, smoothed so that every
/// key has positive probability.
fn aligned_distribution<K: Key>(keys: &[K], path: &Path) -> Result<QueryDistribution<K>, Failure> {
    let text = String::from_utf8(read_file(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let given = parse_weighted_text::<K>(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if let Some(i) = keys.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Failure::Data(format!(
            "distribution-aware indexes need distinct keys; duplicate at position {}",
            i + 1
        )));
    }
    let mut weights = vec![0.0; keys.len()];
    for (k, p) in given.keys().iter().zip(given.probs()) {
        let r = keys.partition_point(|x| x < k);
        if r == keys.len() || keys[r] != *k {
            return Err(Failure::Data(format!("weighted key {k} is not in the dataset")));
        }
        weights[r] = *p;
    }
    Ok(QueryDistribution::smoothed(keys.to_vec(), &weights)?)
}

fn load_index<K: Key>(path: &Path, keys: Vec<K>) -> Result<PgmIndex<K>, Failure> {
    let bytes = read_file(path)?;
    PgmIndex::deserialize(&bytes, keys).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct QueryRow {
    key: String,
    kind: &'static str,
    result: &'static str,
    rank: Option<usize>,
    range_start: Option<usize>,
    range_end: Option<usize>,
}

fn result_name(r: QueryResult) -> &'static str {
    match r {
        QueryResult::Found(_) => "found",
        QueryResult::Predecessor(_) => "predecessor",
        QueryResult::Successor(_) => "successor",
        QueryResult::AbsentBelowMin => "absent_below_min",
        QueryResult::AbsentAboveMax => "absent_above_max",
    }
}

fn cmd_query(a: QueryArgs) -> CmdResult {
    match load_dataset(&a.data)? {
        AnyDataset::U64(d) => query_typed(&a, d),
        AnyDataset::F64(d) => query_typed(&a, d),
    }
}

fn query_typed<K: Key>(a: &QueryArgs, d: Dataset<K>) -> CmdResult {
    let idx = load_index(&a.index, d.keys)?;
    let mut raw = a.keys.clone();
    if let Some(p) = &a.keys_file {
        let text = String::from_utf8(read_file(p)?).map_err(|e| Failure::Data(e.to_string()))?;
        raw.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    if raw.is_empty() {
        return Err(Failure::Usage("no query keys given (use --key or --keys-file)".into()));
    }
    let kind: QueryKind = a.kind.into();
    let hi = match (&a.hi, kind) {
        (Some(h), QueryKind::Range) => Some(parse_key::<K>(h)?),
        (None, QueryKind::Range) => return Err(Failure::Usage("range queries need --hi".into())),
        (Some(_), _) => return Err(Failure::Usage("--hi is only used by range queries".into())),
        (None, _) => None,
    };
    let mut rows = Vec::with_capacity(raw.len());
    for s in &raw {
        let q = parse_key::<K>(s)?;
        let (result, rank, range) = match kind {
            QueryKind::Lookup => one(idx.lookup(q)),
            QueryKind::Predecessor => one(idx.predecessor(q)),
            QueryKind::Successor => one(idx.successor(q)),
            QueryKind::Range => {
                let r = idx.range_query(q, hi.unwrap());
                ("range", None, Some(r))
            }
        };
        rows.push(QueryRow {
            key: q.to_string(),
            kind: kind.name(),
            result,
            rank,
            range_start: range.as_ref().map(|r| r.start),
            range_end: range.map(|r| r.end),
        });
    }
    emit(&mut io::stdout().lock(), a.format, &rows)
}

fn one(r: QueryResult) -> (&'static str, Option<usize>, Option<std::ops::Range<usize>>) {
    (result_name(r), r.rank(), None)
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    match load_dataset(&a.data)? {
        AnyDataset::U64(d) => bench_typed(&a, d),
        AnyDataset::F64(d) => bench_typed(&a, d),
    }
}

fn bench_typed<K: Key>(a: &BenchArgs, d: Dataset<K>) -> CmdResult {
    let kind: QueryKind = a.kind.into();
    let seed = a.seed.seed;
    let workload = if let Some(path) = a.dist.strip_prefix("file:") {
        let text = String::from_utf8(read_file(Path::new(path))?).map_err(|e| Failure::Data(e.to_string()))?;
        let qs = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| parse_key::<K>(l).map_err(|_| Failure::Data(format!("{path}: invalid key {l:?}"))))
            .collect::<Result<Vec<K>, _>>()?;
        Workload::from_queries(&d.keys, qs, kind, seed)?
    } else {
        let dist = match a.dist.as_str() {
            "uniform" => QueryDist::Uniform,
            s => match s.strip_prefix("zipf:").and_then(|x| x.parse::<f64>().ok()) {
                Some(x) if x > 0.0 => QueryDist::Zipf(x),
                _ => return Err(Failure::Usage(format!("unknown query distribution {s:?}"))),
            },
        };
        Workload::generate(&d.keys, kind, dist, a.queries, seed)?
    };
    let mut specs = vec![
        StructureSpec::SortedArray,
        StructureSpec::Multiway {
            node_bytes: a.node_bytes,
        },
    ];
    for &e in &a.eps {
        specs.push(StructureSpec::Pgm(IndexConfig {
            eps_last: e,
            eps_internal: a.eps_internal,
            router: Router::Recursive,
        }));
    }
    let contenders = specs
        .into_iter()
        .map(|s| Contender::build(&d.keys, s))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = BenchOptions {
        repetitions: a.repetitions,
        threads: a.threads.max(1),
    };
    let report = run_bench(&d.keys, &contenders, &workload, opts)?;
    if !report.all_agree() {
        return Err(Failure::Data("structures disagree on the workload answers".into()));
    }
    match &a.output {
        Some(p) => {
            let mut f = fs::File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            emit(&mut f, a.format, &report.rows)
        }
        None => emit(&mut io::stdout().lock(), a.format, &report.rows),
    }
}

#[derive(Serialize)]
struct TuneRow {
    mode: &'static str,
    epsilon_star: u64,
    achieved_space: u64,
    achieved_time_ns: f64,
    iterations: usize,
    builds_performed: usize,
    fit_a: Option<f64>,
    fit_b: Option<f64>,
    fit_r_squared: Option<f64>,
}

fn cmd_tune(a: TuneArgs) -> CmdResult {
    match load_dataset(&a.data)? {
        AnyDataset::U64(d) => tune_typed(&a, d),
        AnyDataset::F64(d) => tune_typed(&a, d),
    }
}

fn tune_typed<K: Key>(a: &TuneArgs, d: Dataset<K>) -> CmdResult {
    let mut cost = match &a.calibration {
        Some(p) => {
            let text = String::from_utf8(read_file(p)?).map_err(|e| Failure::Data(e.to_string()))?;
            CostModel::parse_calibration(&text).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?
        }
        None => CostModel::default(),
    };
    if let Some(b) = a.page_size {
        cost = CostModel::new(b, cost.latency_c)?;
    }
    let n = d.keys.len();
    let base = match a.page_size {
        Some(b) => page_interval(n, b),
        None => default_interval(n),
    };
    let interval = (a.eps_min.unwrap_or(base.0), a.eps_max.unwrap_or(base.1));
    if !(a.tol >= 0.0) {
        return Err(Failure::Usage("--tol must be non-negative".into()));
    }
    let (mode, result): (&'static str, TunerResult) = match a.mode {
        ModeArg::Time => {
            let s_max = a
                .space_budget
                .ok_or_else(|| Failure::Usage("--mode time needs --space-budget".into()))?;
            let req = TimeRequest {
                s_max,
                tol: a.tol as u64,
                interval: Some(interval),
                policy: if a.plain_binary {
                    SearchPolicy::PlainBinary
                } else {
                    SearchPolicy::Biased
                },
                cost,
            };
            ("time", minimize_time(&d.keys, &req)?)
        }
        ModeArg::Space => {
            let t_ns = a
                .time_budget_ns
                .ok_or_else(|| Failure::Usage("--mode space needs --time-budget-ns".into()))?;
            let mut req = SpaceRequest::new(t_ns * 1e-9, a.tol * 1e-9, cost);
            req.interval = Some(interval);
            let r = match a.timer {
                TimerArg::Model => minimize_space(&d.keys, &req, &mut ModelTimer::new(cost))?,
                TimerArg::Wall => {
                    let mut t = WallClockTimer {
                        seed: a.seed.seed,
                        ..WallClockTimer::default()
                    };
                    minimize_space(&d.keys, &req, &mut t)?
                }
            };
            ("space", r)
        }
    };
    if let Some(p) = &a.trace {
        let mut f = fs::File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
        emit(&mut f, OutFormat::Csv, &result.trace)?;
    }
    let row = TuneRow {
        mode,
        epsilon_star: result.epsilon_star,
        achieved_space: result.achieved_space,
        achieved_time_ns: result.achieved_time * 1e9,
        iterations: result.iterations,
        builds_performed: result.builds_performed,
        fit_a: result.fit.map(|f| f.a),
        fit_b: result.fit.map(|f| f.b),
        fit_r_squared: result.fit.map(|f| f.r_squared),
    };
    emit(&mut io::stdout().lock(), a.format, &[row])
}

#[derive(Serialize)]
struct LevelRow {
    level: usize,
    segments: usize,
    epsilon: u32,
    bytes: u64,
}

#[derive(Serialize)]
struct SummaryRow {
    key_type: &'static str,
    router: &'static str,
    eps_last: u32,
    eps_internal: u32,
    key_count: u64,
    levels: usize,
    total_segments: usize,
    bytes: u64,
}

fn cmd_inspect(a: InspectArgs) -> CmdResult {
    let bytes = read_file(&a.index)?;
    let h = read_header(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", a.index.display())))?;
    match h.key_type {
        KeyType::U64 => inspect_typed::<u64>(&a, &bytes),
        KeyType::F64 => inspect_typed::<f64>(&a, &bytes),
    }
}

fn inspect_typed<K: Key>(a: &InspectArgs, bytes: &[u8]) -> CmdResult {
    let m = PgmModel::<K>::deserialize(bytes).map_err(|e| Failure::Data(format!("{}: {e}", a.index.display())))?;
    let st = m.stats();
    let summary = SummaryRow {
        key_type: match K::KEY_TYPE {
            KeyType::U64 => "u64",
            KeyType::F64 => "f64",
        },
        router: m.router().name(),
        eps_last: m.eps_last(),
        eps_internal: m.eps_internal(),
        key_count: m.key_count() as u64,
        levels: st.levels,
        total_segments: st.total_segments,
        bytes: st.bytes,
    };
    let levels: Vec<LevelRow> = m
        .levels()
        .iter()
        .enumerate()
        .map(|(i, l)| LevelRow {
            level: i,
            segments: l.len(),
            epsilon: l.epsilon(),
            bytes: 8 + 24 * l.len() as u64,
        })
        .collect();
    let mut out = io::stdout().lock();
    emit(&mut out, a.format, &[summary])?;
    if a.format == OutFormat::Csv {
        writeln!(out)?;
    }
    emit(&mut out, a.format, &levels)
}

fn cmd_calibrate(a: CalibrateArgs) -> CmdResult {
    let c = calibrate_latency(a.array_len, a.searches, a.seed.seed);
    let model = CostModel::new(a.page_size, c)?;
    write_file(&a.output, model.to_calibration().as_bytes())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
