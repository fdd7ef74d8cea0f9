//! Indexes whose search windows shrink around frequently queried keys.
//!
//! A key queried with probability `p` gets a band of half-height
//! `min(1/p, ε)` in the leaf level, so its predicted position is close to
//! its rank and an exponential search from the prediction finishes in a
//! number of steps logarithmic in `1/p`. Upper levels are built the same way
//! on the segments' first keys, each point carrying the probability of its
//! most popular child relative to the probability mass of its segment.

use crate::index::{PgmIndex, PgmModel, QueryResult, Router};
use crate::key::Key;
use crate::pla::{weighted_segments_with_starts, PlaModel, Point};
use crate::{Error, Result};

/// Accepted deviation of the probability sum from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedKey<K> {
    pub key: K,
    pub p: f64,
}

/// Access probabilities over a strictly increasing key set.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDistribution<K> {
    keys: Vec<K>,
    probs: Vec<f64>,
}

impl<K: Key> QueryDistribution<K> {
    /// Probabilities must be positive and sum to 1.
    pub fn new(weights: Vec<WeightedKey<K>>) -> Result<Self> {
        let (keys, probs): (Vec<K>, Vec<f64>) = weights.into_iter().map(|w| (w.key, w.p)).unzip();
        Self::from_parts(keys, probs)
    }

    pub fn from_parts(keys: Vec<K>, probs: Vec<f64>) -> Result<Self> {
        validate_keys(&keys)?;
        if keys.len() != probs.len() {
            return Err(Error::InvalidRequest(format!(
                "{} keys but {} probabilities",
                keys.len(),
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidProbability { index: i, value: p });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::UnnormalizedDistribution(sum));
        }
        Ok(Self { keys, probs })
    }

    /// Normalizes positive weights into probabilities.
    pub fn from_weights(keys: Vec<K>, weights: &[f64]) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidProbability { index: i, value: w });
            }
        }
        let total: f64 = weights.iter().sum();
        Self::from_parts(keys, weights.iter().map(|w| w / total).collect())
    }

    /// Raises every weight to at least `1/n²` and renormalizes, so that
    /// never-queried keys can be indexed.
    pub fn smoothed(keys: Vec<K>, weights: &[f64]) -> Result<Self> {
        let n = weights.len().max(1) as f64;
        let floor = 1.0 / (n * n);
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidProbability { index: i, value: w });
            }
        }
        let total: f64 = weights.iter().sum();
        let scale = if total > 0.0 { total } else { 1.0 };
        let raised: Vec<f64> = weights.iter().map(|&w| (w / scale).max(floor)).collect();
        Self::from_weights(keys, &raised)
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

fn validate_keys<K: Key>(keys: &[K]) -> Result<()> {
    if keys.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (i, k) in keys.iter().enumerate() {
        if !k.is_valid() {
            return Err(Error::InvalidKey(i));
        }
        if i > 0 && !(keys[i - 1] < *k) {
            return Err(Error::UnsortedInput(i));
        }
    }
    Ok(())
}

/// Shannon entropy in bits. Zero entries contribute nothing.
pub fn entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Half-height of the band of a point with relative probability `p`.
pub fn y_range(p: f64, epsilon: u32) -> f64 {
    let eps = epsilon as f64;
    if p * eps >= 1.0 {
        1.0 / p
    } else {
        eps
    }
}

/// Bands of the leaf level, one per key.
pub fn leaf_y_ranges<K: Key>(dist: &QueryDistribution<K>, epsilon: u32) -> Vec<f64> {
    dist.probs.iter().map(|&p| y_range(p, epsilon)).collect()
}

/// Builds one weighted level over `keys`, where point `i` has relative
/// probability `rel[i]` and absolute mass `mass[i]`. Returns the level and,
/// for each segment, its first key, relative probability and mass.
fn weighted_level<K: Key>(
    keys: &[K],
    rel: &[f64],
    mass: &[f64],
    epsilon: u32,
) -> (PlaModel<K>, Vec<K>, Vec<f64>, Vec<f64>) {
    let points: Vec<Point<K>> = keys
        .iter()
        .enumerate()
        .map(|(i, &x)| Point {
            x,
            y: i,
            y_range: y_range(rel[i], epsilon),
        })
        .collect();
    let (segments, starts, _) = weighted_segments_with_starts(&points);
    let mut next_keys = Vec::with_capacity(segments.len());
    let mut next_rel = Vec::with_capacity(segments.len());
    let mut next_mass = Vec::with_capacity(segments.len());
    for (j, seg) in segments.iter().enumerate() {
        let end = starts.get(j + 1).copied().unwrap_or(keys.len());
        let covered = &mass[starts[j]..end];
        let total: f64 = covered.iter().sum();
        // Leftmost maximum.
        let top = covered.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        next_keys.push(seg.first_key);
        next_rel.push((top / total).min(1.0));
        next_mass.push(total);
    }
    let level = PlaModel::from_parts(segments, epsilon, keys.len());
    (level, next_keys, next_rel, next_mass)
}

/// Builds the levels of a distribution-aware index, using `epsilon` on every
/// level.
pub fn build_distribution_aware<K: Key>(
    dist: &QueryDistribution<K>,
    epsilon: u32,
) -> Result<PgmIndex<K>> {
    if epsilon == 0 || epsilon > i32::MAX as u32 {
        return Err(Error::EpsilonOutOfRange(epsilon as u64));
    }
    let mut levels = Vec::new();
    let (mut keys, mut rel, mut mass) = (dist.keys.clone(), dist.probs.clone(), dist.probs.clone());
    loop {
        let (level, k, r, m) = weighted_level(&keys, &rel, &mass, epsilon);
        let done = level.len() == 1 && !levels.is_empty();
        levels.push(level);
        if done {
            break;
        }
        (keys, rel, mass) = (k, r, m);
    }
    levels.reverse();
    let model = PgmModel::from_levels(levels, epsilon, epsilon, Router::DistributionAware)?;
    PgmIndex::from_model(model, dist.keys.clone())
}

/// Lookup that searches exponentially from every prediction. The second
/// value counts comparisons over all levels.
pub fn weighted_lookup<K: Key>(idx: &PgmIndex<K>, q: K) -> (QueryResult, u64) {
    idx.lookup_with_steps(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pla::build_optimal_pla;

    #[test]
    fn entropy_examples() {
        assert!((entropy(&vec![1.0 / 1024.0; 1024]) - 10.0).abs() < 1e-12);
        assert_eq!(entropy(&[1.0]), 0.0);
        assert!((entropy(&[0.5, 0.25, 0.25]) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert_eq!(
            QueryDistribution::from_parts(vec![1u64, 2], vec![1.0, 0.0]),
            Err(Error::InvalidProbability {
                index: 1,
                value: 0.0
            })
        );
        assert!(matches!(
            QueryDistribution::from_parts(vec![1u64, 2], vec![0.5, 0.4]),
            Err(Error::UnnormalizedDistribution(_))
        ));
        let d = QueryDistribution::smoothed(vec![1u64, 2, 3], &[0.0, 2.0, 2.0]).unwrap();
        assert!(d.probs().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn uniform_distribution_reproduces_uniform_leaf() {
        let keys: Vec<u64> = (0..5000u64).map(|i| i * 7 + (i * i) % 7).collect();
        let n = keys.len();
        let dist = QueryDistribution::from_parts(keys.clone(), vec![1.0 / n as f64; n]).unwrap();
        let idx = build_distribution_aware(&dist, 8).unwrap();
        let plain = build_optimal_pla(&keys, 8).unwrap();
        assert_eq!(idx.model().leaf(), &plain);
    }

    #[test]
    fn popular_key_gets_a_tight_window() {
        let n = 10_000usize;
        let keys: Vec<u64> = (0..n as u64).map(|i| i * i / 5 + i).collect();
        let hot = 4321;
        let mut probs = vec![0.5 / (n - 1) as f64; n];
        probs[hot] = 0.5;
        let dist = QueryDistribution::from_parts(keys.clone(), probs).unwrap();
        let idx = build_distribution_aware(&dist, 64).unwrap();
        let seg = idx.model().leaf().segments()[idx.model().leaf().segment_for(keys[hot])];
        assert!((seg.predict(keys[hot]) - hot as i64).abs() <= 2);
        let (res, steps) = weighted_lookup(&idx, keys[hot]);
        assert_eq!(res, QueryResult::Found(hot));
        assert!(steps <= 16, "{steps}");
    }
}
