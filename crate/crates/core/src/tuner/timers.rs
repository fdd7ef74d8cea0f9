//! Sources of mean query time for the space-minimizing search.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cost::CostModel;
use crate::index::PgmIndex;
use crate::key::Key;

/// Mean seconds per query for an index built at some ε.
pub trait QueryTimer<K: Key> {
    fn mean_query_seconds(&mut self, index: &PgmIndex<K>) -> f64;
}

/// Deterministic timer evaluating the cost formula at the worst-case leaf
/// size `m = n / 2ε`, plus one step for the data level:
/// `t(ε) = c · log_{2ε}(n) · log₂(2ε / B)`.
#[derive(Debug, Clone, Copy)]
pub struct ModelTimer {
    pub model: CostModel,
}

impl ModelTimer {
    pub fn new(model: CostModel) -> Self {
        Self { model }
    }

    pub fn time(&self, n: u64, epsilon: u64) -> f64 {
        let two_eps = 2.0 * epsilon.max(1) as f64;
        let n = n.max(2) as f64;
        self.model.latency_c * (n.ln() / two_eps.ln()) * (two_eps / self.model.page_size as f64).log2()
    }

    /// Largest real ε with `time(n, ε) <= t`, or `None` when no ε reaches it.
    pub fn invert(&self, n: u64, t: f64) -> Option<f64> {
        let lg_n = (n.max(2) as f64).log2();
        let lg_b = (self.model.page_size as f64).log2();
        let ratio = t / (self.model.latency_c * lg_n);
        if ratio >= 1.0 {
            return Some(f64::INFINITY);
        }
        // t = c·lg n·(1 - lg B / lg 2ε)
        let lg_two_eps = lg_b / (1.0 - ratio);
        let eps = 2f64.powf(lg_two_eps) / 2.0;
        (eps.is_finite() && eps > 0.0).then_some(eps)
    }
}

impl<K: Key> QueryTimer<K> for ModelTimer {
    fn mean_query_seconds(&mut self, index: &PgmIndex<K>) -> f64 {
        self.time(index.len() as u64, index.model().eps_last() as u64)
    }
}

/// Wall-clock timer: a fixed seeded batch of keys drawn uniformly from the
/// indexed array, reporting the median over repetitions of the mean time.
#[derive(Debug, Clone, Copy)]
pub struct WallClockTimer {
    pub queries: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for WallClockTimer {
    fn default() -> Self {
        Self {
            queries: 100_000,
            repetitions: 3,
            seed: 42,
        }
    }
}

impl<K: Key> QueryTimer<K> for WallClockTimer {
    fn mean_query_seconds(&mut self, index: &PgmIndex<K>) -> f64 {
        let keys = index.keys();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let batch: Vec<K> = (0..self.queries.max(1))
            .map(|_| keys[rng.random_range(0..keys.len())])
            .collect();
        let mut times: Vec<f64> = (0..self.repetitions.max(1))
            .map(|_| {
                let start = Instant::now();
                for &q in &batch {
                    black_box(index.lookup(black_box(q)));
                }
                start.elapsed().as_secs_f64() / batch.len() as f64
            })
            .collect();
        times.sort_by(f64::total_cmp);
        times[times.len() / 2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_time_is_increasing_and_invertible() {
        let t = ModelTimer::new(CostModel {
            page_size: 8,
            latency_c: 1e-7,
        });
        let n = 1_000_000;
        let mut prev = t.time(n, 4);
        for e in 5..5000 {
            let cur = t.time(n, e);
            assert!(cur > prev);
            prev = cur;
        }
        for e in [8u64, 50, 333, 4000] {
            let inv = t.invert(n, t.time(n, e)).unwrap();
            assert!((inv - e as f64).abs() < 1e-6 * e as f64, "{inv} vs {e}");
        }
        assert_eq!(t.invert(n, 1.0), Some(f64::INFINITY));
    }
}
