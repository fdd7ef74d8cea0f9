//! Piecewise linear ε-approximations of sorted keys.
//!
//! A [`PlaModel`] is a sequence of [`Segment`]s; the segment responsible for a
//! key is the rightmost one whose `first_key` is not greater than it. Every
//! builder here guarantees that, for each input key with first-occurrence rank
//! `r`, the floored prediction of the responsible segment lies in
//! `[r - ε, r + ε]`.
//!
//! Intercepts are stored relative to `first_key`: a segment evaluates
//! `slope * (k - first_key) + intercept`, with the subtraction performed in the
//! key domain so that large integer keys keep full precision.

mod build;
mod cone;
mod hull;
mod oracle;

pub use build::{build_optimal_pla, build_weighted_pla};
pub(crate) use build::weighted_segments_with_starts;
pub use cone::build_shrinking_cone;
pub use oracle::{
    bound_helpers, dp_oracle_min_segments, dp_oracle_min_segments_with_limit, Bounds,
    DP_ORACLE_LIMIT,
};

use crate::key::Key;

/// One linear model covering the keys from `first_key` up to the next
/// segment's `first_key`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<K> {
    pub first_key: K,
    pub slope: f64,
    /// Value of the line at `first_key`.
    pub intercept: f64,
}

impl<K: Key> Segment<K> {
    pub fn new(first_key: K, slope: f64, intercept: f64) -> Self {
        Self {
            first_key,
            slope,
            intercept,
        }
    }

    /// Unfloored line value at `k`.
    #[inline]
    pub fn eval(&self, k: K) -> f64 {
        self.slope * k.offset_from(self.first_key) + self.intercept
    }

    /// Floored prediction `⌊f(k)⌋`. Callers clamp it to the valid positions.
    #[inline]
    pub fn predict(&self, k: K) -> i64 {
        self.eval(k).floor() as i64
    }
}

/// A point of a weighted build: key, rank, and half-height of the band the
/// fitted line must cross.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<K> {
    pub x: K,
    pub y: usize,
    pub y_range: f64,
}

/// An ε-approximate piecewise linear model of one sorted sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaModel<K> {
    segments: Vec<Segment<K>>,
    epsilon: u32,
    n_keys: usize,
}

impl<K: Key> PlaModel<K> {
    pub(crate) fn from_parts(segments: Vec<Segment<K>>, epsilon: u32, n_keys: usize) -> Self {
        debug_assert!(!segments.is_empty());
        Self {
            segments,
            epsilon,
            n_keys,
        }
    }

    pub fn segments(&self) -> &[Segment<K>] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn epsilon(&self) -> u32 {
        self.epsilon
    }

    /// Number of positions the model predicts into.
    pub fn n_keys(&self) -> usize {
        self.n_keys
    }

    /// Index of the rightmost segment with `first_key <= k`, or 0 when `k`
    /// precedes every segment.
    pub fn segment_for(&self, k: K) -> usize {
        self.segments
            .partition_point(|s| s.first_key <= k)
            .saturating_sub(1)
    }

    /// Prediction clamped to `[0, n_keys - 1]`.
    pub fn predict(&self, k: K) -> usize {
        let p = self.segments[self.segment_for(k)].predict(k);
        p.clamp(0, self.n_keys as i64 - 1) as usize
    }

    /// Largest floored error `|⌊f(k)⌋ - rank(k)|` over `keys`, where rank is
    /// the first-occurrence position. Linear scan.
    pub fn max_error(&self, keys: &[K]) -> u64 {
        let mut worst = 0u64;
        let mut seg = 0usize;
        let mut first_rank = 0usize;
        for (i, &k) in keys.iter().enumerate() {
            if i == 0 || keys[i - 1] != k {
                first_rank = i;
            }
            while seg + 1 < self.segments.len() && self.segments[seg + 1].first_key <= k {
                seg += 1;
            }
            let err = (self.segments[seg].predict(k) - first_rank as i64).unsigned_abs();
            worst = worst.max(err);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_eval_examples() {
        let s = Segment::new(0u64, 1.0, 1.0);
        assert_eq!(s.predict(5), 6);
        let s = Segment::new(10u64, 0.0, 7.0);
        assert_eq!(s.predict(12), 7);
    }

    #[test]
    fn segment_eval_on_exact_line() {
        // keys 0,2,...,198 with rank k/2: the fitted line is exact.
        let keys: Vec<u64> = (0..100).map(|i| 2 * i).collect();
        let m = build_optimal_pla(&keys, 1).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.segments()[0].predict(100), 50);
    }

    #[test]
    fn responsible_segment_lookup() {
        let m = PlaModel::from_parts(
            vec![
                Segment::new(10u64, 0.0, 0.0),
                Segment::new(20, 0.0, 5.0),
                Segment::new(30, 0.0, 9.0),
            ],
            1,
            10,
        );
        assert_eq!(m.segment_for(5), 0);
        assert_eq!(m.segment_for(10), 0);
        assert_eq!(m.segment_for(25), 1);
        assert_eq!(m.segment_for(30), 2);
        assert_eq!(m.segment_for(1000), 2);
    }
}
