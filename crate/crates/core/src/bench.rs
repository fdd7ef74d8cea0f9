//! Query workloads and the benchmark runner.

use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::{MultiwayBaseline, RankIndex, SortedArray};
use crate::dataset::zipf_popularity;
use crate::index::{IndexConfig, PgmIndex};
use crate::key::{Key, KeyType};
use crate::{Error, Result};

/// Version of the report row layout. Bump when columns change.
pub const BENCH_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Lookup,
    Predecessor,
    Successor,
    Range,
}

impl QueryKind {
    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Lookup => "lookup",
            QueryKind::Predecessor => "predecessor",
            QueryKind::Successor => "successor",
            QueryKind::Range => "range",
        }
    }
}

impl FromStr for QueryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lookup" => Ok(QueryKind::Lookup),
            "predecessor" => Ok(QueryKind::Predecessor),
            "successor" => Ok(QueryKind::Successor),
            "range" => Ok(QueryKind::Range),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QueryDist {
    /// Half indexed keys, 45% uniform over `[min, max]`, 5% outside it.
    Uniform,
    /// Indexed keys only, with Zipf popularity of the given exponent.
    Zipf(f64),
    /// Supplied by the user.
    File,
}

impl QueryDist {
    pub fn name(self) -> String {
        match self {
            QueryDist::Uniform => "uniform".into(),
            QueryDist::Zipf(s) => format!("zipf({s})"),
            QueryDist::File => "file".into(),
        }
    }
}

/// A batch of queries. For range queries, `hi[i]` is the upper end of
/// query `i`; other kinds leave `hi` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload<K> {
    pub queries: Vec<K>,
    pub hi: Vec<K>,
    pub kind: QueryKind,
    pub distribution: QueryDist,
    pub key_type: KeyType,
}

impl<K: Key> Workload<K> {
    /// Seeded workload over `keys` (sorted, nonempty).
    pub fn generate(keys: &[K], kind: QueryKind, dist: QueryDist, count: usize, seed: u64) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = keys.len();
        let queries: Vec<K> = match dist {
            QueryDist::Uniform => {
                let (lo, hi) = (keys[0].to_f64(), keys[n - 1].to_f64());
                let span = (hi - lo).max(1.0);
                (0..count)
                    .map(|_| {
                        let u: f64 = rng.random();
                        if u < 0.5 {
                            keys[rng.random_range(0..n)]
                        } else if u < 0.95 {
                            K::from_f64(lo + rng.random::<f64>() * span)
                        } else if u < 0.975 {
                            K::from_f64(lo - rng.random::<f64>() * span * 0.1 - 1.0)
                        } else {
                            K::from_f64(hi + rng.random::<f64>() * span * 0.1 + 1.0)
                        }
                    })
                    .collect()
            }
            QueryDist::Zipf(s) => {
                let w = zipf_popularity(n, s, seed);
                let pick = WeightedIndex::new(&w).map_err(|e| Error::InvalidRequest(e.to_string()))?;
                (0..count).map(|_| keys[pick.sample(&mut rng)]).collect()
            }
            QueryDist::File => {
                return Err(Error::InvalidRequest("file workloads are built with from_queries".into()))
            }
        };
        let hi = range_ends(keys, &queries, kind, &mut rng);
        Ok(Self {
            queries,
            hi,
            kind,
            distribution: dist,
            key_type: K::KEY_TYPE,
        })
    }

    /// Workload from user-supplied query keys. Range ends are drawn with
    /// `seed`.
    pub fn from_queries(keys: &[K], queries: Vec<K>, kind: QueryKind, seed: u64) -> Result<Self> {
        if let Some(i) = queries.iter().position(|q| !q.is_valid()) {
            return Err(Error::InvalidKey(i));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hi = range_ends(keys, &queries, kind, &mut rng);
        Ok(Self {
            queries,
            hi,
            kind,
            distribution: QueryDist::File,
            key_type: K::KEY_TYPE,
        })
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

/// Upper ends for range queries: the key up to 100 positions after the
/// query's insertion point.
fn range_ends<K: Key>(keys: &[K], queries: &[K], kind: QueryKind, rng: &mut ChaCha8Rng) -> Vec<K> {
    if kind != QueryKind::Range {
        return Vec::new();
    }
    queries
        .iter()
        .map(|&q| {
            let at = keys.partition_point(|&k| k < q);
            let end = (at + rng.random_range(0..=100)).min(keys.len() - 1);
            if keys[end] < q {
                q
            } else {
                keys[end]
            }
        })
        .collect()
}

/// Structures the runner knows how to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureSpec {
    SortedArray,
    Multiway { node_bytes: usize },
    Pgm(IndexConfig),
}

/// A structure with its build time.
pub struct Contender<K: Key> {
    pub build_seconds: f64,
    pub structure: Box<dyn RankIndex<K> + Send + Sync>,
}

impl<K: Key> Contender<K> {
    pub fn build(keys: &[K], spec: StructureSpec) -> Result<Self> {
        let start = Instant::now();
        let structure: Box<dyn RankIndex<K> + Send + Sync> = match spec {
            StructureSpec::SortedArray => Box::new(SortedArray::new(keys.to_vec())?),
            StructureSpec::Multiway { node_bytes } => Box::new(MultiwayBaseline::new(keys.to_vec(), node_bytes)?),
            StructureSpec::Pgm(cfg) => Box::new(PgmIndex::build(keys.to_vec(), &cfg)?),
        };
        Ok(Self {
            build_seconds: start.elapsed().as_secs_f64(),
            structure,
        })
    }

    /// Wraps an already built structure.
    pub fn prebuilt(structure: Box<dyn RankIndex<K> + Send + Sync>, build_seconds: f64) -> Self {
        Self {
            build_seconds,
            structure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BenchRow {
    pub schema_version: u32,
    pub structure: String,
    pub query_kind: &'static str,
    pub distribution: String,
    pub n_keys: usize,
    pub queries: usize,
    pub build_seconds: f64,
    pub bytes: u64,
    pub mean_ns: f64,
    pub p99_ns: f64,
    /// Mean of `|predicted − true rank|` over queries hitting indexed keys.
    pub mae: Option<f64>,
    pub error_stddev: Option<f64>,
    /// Hash of every answer; equal across structures on the same workload.
    pub answer_digest: u64,
    /// Whether the answers match those of the first structure.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.agrees)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub repetitions: usize,
    /// Threads sharing the batch when measuring the mean. 1 keeps the run
    /// single-threaded.
    pub threads: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            repetitions: 3,
            threads: 1,
        }
    }
}

fn answer<K: Key>(s: &dyn RankIndex<K>, w: &Workload<K>, i: usize) -> u64 {
    let q = w.queries[i];
    let enc = |r: crate::QueryResult| -> u64 {
        use crate::QueryResult::*;
        match r {
            Found(p) => (p as u64) << 3,
            Predecessor(p) => ((p as u64) << 3) | 1,
            Successor(p) => ((p as u64) << 3) | 2,
            AbsentBelowMin => 3,
            AbsentAboveMax => 4,
        }
    };
    match w.kind {
        QueryKind::Lookup => enc(s.lookup(q)),
        QueryKind::Predecessor => enc(s.predecessor(q)),
        QueryKind::Successor => enc(s.successor(q)),
        QueryKind::Range => {
            let r = s.range_query(q, w.hi[i]);
            ((r.start as u64) << 32) ^ r.end as u64
        }
    }
}

fn digest(answers: &[u64]) -> u64 {
    // FNV-1a over the little-endian answer words.
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for a in answers {
        for b in a.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn time_batch<K: Key>(s: &(dyn RankIndex<K> + Send + Sync), w: &Workload<K>, threads: usize) -> f64 {
    let n = w.len();
    let start = Instant::now();
    if threads <= 1 {
        for i in 0..n {
            black_box(answer(s, w, i));
        }
    } else {
        let chunk = n.div_ceil(threads);
        std::thread::scope(|scope| {
            for t in 0..threads {
                let range = (t * chunk).min(n)..((t + 1) * chunk).min(n);
                scope.spawn(move || {
                    for i in range {
                        black_box(answer(s, w, i));
                    }
                });
            }
        });
    }
    start.elapsed().as_nanos() as f64 / n.max(1) as f64
}

/// Runs `workload` against every contender. Times are the median over
/// `repetitions` of the per-query mean; p99 comes from a separate pass
/// timing each query on its own, so it includes clock overhead.
pub fn run_bench<K: Key>(
    keys: &[K],
    contenders: &[Contender<K>],
    workload: &Workload<K>,
    opts: BenchOptions,
) -> Result<BenchReport> {
    if workload.key_type != K::KEY_TYPE {
        return Err(Error::KeyTypeMismatchWorkload);
    }
    let mut rows = Vec::with_capacity(contenders.len());
    let mut reference: Option<Vec<u64>> = None;
    for c in contenders {
        let s = c.structure.as_ref();
        if s.keys().len() != keys.len() {
            return Err(Error::InvalidRequest(format!("{} was built over other keys", s.name())));
        }
        let answers: Vec<u64> = (0..workload.len()).map(|i| answer(s, workload, i)).collect();
        let agrees = match &reference {
            None => {
                reference = Some(answers.clone());
                true
            }
            Some(r) => *r == answers,
        };

        let mut means: Vec<f64> = (0..opts.repetitions.max(1))
            .map(|_| time_batch(s, workload, opts.threads))
            .collect();
        means.sort_by(f64::total_cmp);
        let mean_ns = means[means.len() / 2];

        let mut each: Vec<f64> = (0..workload.len())
            .map(|i| {
                let t = Instant::now();
                black_box(answer(s, workload, i));
                t.elapsed().as_nanos() as f64
            })
            .collect();
        each.sort_by(f64::total_cmp);
        let p99_ns = if each.is_empty() {
            0.0
        } else {
            each[((each.len() as f64 * 0.99).ceil() as usize).clamp(1, each.len()) - 1]
        };

        let (mae, error_stddev) = prediction_error(s, keys, &workload.queries);
        rows.push(BenchRow {
            schema_version: BENCH_SCHEMA_VERSION,
            structure: s.name(),
            query_kind: workload.kind.name(),
            distribution: workload.distribution.name(),
            n_keys: keys.len(),
            queries: workload.len(),
            build_seconds: c.build_seconds,
            bytes: s.index_bytes(),
            mean_ns,
            p99_ns,
            mae,
            error_stddev,
            answer_digest: digest(&answers),
            agrees,
        });
    }
    Ok(BenchReport { rows })
}

/// Mean and population standard deviation of the prediction error over
/// the queries that are indexed keys, measured against the first
/// occurrence.
pub fn prediction_error<K: Key>(
    s: &dyn RankIndex<K>,
    keys: &[K],
    queries: &[K],
) -> (Option<f64>, Option<f64>) {
    let mut errs = Vec::new();
    for &q in queries {
        let Some(pred) = s.predicted_rank(q) else {
            return (None, None);
        };
        let r = keys.partition_point(|&k| k < q);
        if r < keys.len() && keys[r] == q {
            errs.push((pred as f64 - r as f64).abs());
        }
    }
    if errs.is_empty() {
        return (None, None);
    }
    let n = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / n;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_dataset, GenKind};

    fn contenders(keys: &[u64]) -> Vec<Contender<u64>> {
        [
            StructureSpec::SortedArray,
            StructureSpec::Multiway { node_bytes: 128 },
            StructureSpec::Pgm(IndexConfig::recursive(512)),
            StructureSpec::Pgm(IndexConfig::recursive(8)),
        ]
        .into_iter()
        .map(|s| Contender::build(keys, s).unwrap())
        .collect()
    }

    #[test]
    fn structures_agree_and_mae_is_bounded() {
        let d = gen_dataset(GenKind::LognormalGaps, 50_000, 4).unwrap();
        let cs = contenders(&d.keys);
        for kind in ["lookup", "predecessor", "successor", "range"] {
            let w = Workload::generate(&d.keys, kind.parse().unwrap(), QueryDist::Uniform, 20_000, 9).unwrap();
            let rep = run_bench(&d.keys, &cs, &w, BenchOptions { repetitions: 1, threads: 2 }).unwrap();
            assert!(rep.all_agree(), "{kind}");
            assert!(rep.rows[2].mae.unwrap() <= 512.0);
            assert!(rep.rows[3].mae.unwrap() <= 8.0);
            assert_eq!(rep.rows[0].mae, None);
        }
    }

    #[test]
    fn repeated_runs_report_identical_errors() {
        let d = gen_dataset(GenKind::ZipfGaps, 20_000, 1).unwrap();
        let cs = contenders(&d.keys);
        let w = Workload::generate(&d.keys, QueryKind::Lookup, QueryDist::Zipf(1.0), 5000, 3).unwrap();
        let a = run_bench(&d.keys, &cs, &w, BenchOptions::default()).unwrap();
        let b = run_bench(&d.keys, &cs, &w, BenchOptions::default()).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!((x.mae, x.error_stddev, x.answer_digest), (y.mae, y.error_stddev, y.answer_digest));
        }
    }

    #[test]
    fn mismatched_workload_is_rejected() {
        let keys = vec![1u64, 2, 3];
        let cs = vec![Contender::build(&keys, StructureSpec::SortedArray).unwrap()];
        let mut w = Workload::generate(&keys, QueryKind::Lookup, QueryDist::Uniform, 10, 1).unwrap();
        w.key_type = KeyType::F64;
        assert_eq!(
            run_bench(&keys, &cs, &w, BenchOptions::default()),
            Err(Error::KeyTypeMismatchWorkload)
        );
    }
}
