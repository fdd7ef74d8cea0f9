//! Comparison structures answering the same rank queries as [`PgmIndex`].

use std::ops::Range;

use crate::index::{MultiwayTree, PgmIndex, QueryResult};
use crate::key::{validate_sorted, Key};
use crate::{Error, Result};

/// Bytes per entry of the multiway baseline: a key plus a child pointer and
/// a position, matching the size of a stored segment.
pub const MULTIWAY_ENTRY_BYTES: usize = 24;

/// A structure answering rank queries over a sorted key array.
///
/// Implementors supply `lower_bound` and `upper_bound`; the query kinds are
/// derived from them unless overridden.
pub trait RankIndex<K: Key> {
    fn name(&self) -> String;
    fn keys(&self) -> &[K];
    /// Bytes taken by the structure on top of the key array.
    fn index_bytes(&self) -> u64;
    /// Number of keys `< q`.
    fn lower_bound(&self, q: K) -> usize;
    /// Number of keys `<= q`.
    fn upper_bound(&self, q: K) -> usize;

    /// Rank predicted before the final search, for structures that make one.
    fn predicted_rank(&self, _q: K) -> Option<usize> {
        None
    }

    fn lookup(&self, q: K) -> QueryResult {
        let keys = self.keys();
        let b = self.lower_bound(q);
        if b < keys.len() && keys[b] == q {
            QueryResult::Found(b)
        } else if b == 0 {
            QueryResult::AbsentBelowMin
        } else {
            QueryResult::Predecessor(b - 1)
        }
    }

    fn predecessor(&self, q: K) -> QueryResult {
        let b = self.upper_bound(q);
        if b == 0 {
            QueryResult::AbsentBelowMin
        } else if self.keys()[b - 1] == q {
            QueryResult::Found(b - 1)
        } else {
            QueryResult::Predecessor(b - 1)
        }
    }

    fn successor(&self, q: K) -> QueryResult {
        let keys = self.keys();
        let b = self.lower_bound(q);
        if b == keys.len() {
            QueryResult::AbsentAboveMax
        } else if keys[b] == q {
            QueryResult::Found(b)
        } else {
            QueryResult::Successor(b)
        }
    }

    fn range_query(&self, lo: K, hi: K) -> Range<usize> {
        if !(lo <= hi) {
            return 0..0;
        }
        let start = self.lower_bound(lo);
        start..self.upper_bound(hi).max(start)
    }
}

/// Binary search over the plain sorted array.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedArray<K> {
    keys: Vec<K>,
}

impl<K: Key> SortedArray<K> {
    pub fn new(keys: Vec<K>) -> Result<Self> {
        validate_sorted(&keys)?;
        Ok(Self { keys })
    }
}

impl<K: Key> RankIndex<K> for SortedArray<K> {
    fn name(&self) -> String {
        "sorted-array".into()
    }

    fn keys(&self) -> &[K] {
        &self.keys
    }

    fn index_bytes(&self) -> u64 {
        0
    }

    fn lower_bound(&self, q: K) -> usize {
        self.keys.partition_point(|&k| k < q)
    }

    fn upper_bound(&self, q: K) -> usize {
        self.keys.partition_point(|&k| k <= q)
    }
}

/// Static multiway tree over every key, with nodes of `node_bytes` holding
/// `node_bytes / 24` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiwayBaseline<K> {
    node_bytes: usize,
    tree: MultiwayTree<K>,
}

impl<K: Key> MultiwayBaseline<K> {
    pub fn fanout_for(node_bytes: usize) -> usize {
        node_bytes / MULTIWAY_ENTRY_BYTES
    }

    pub fn new(keys: Vec<K>, node_bytes: usize) -> Result<Self> {
        validate_sorted(&keys)?;
        let fanout = Self::fanout_for(node_bytes);
        if fanout < 2 {
            return Err(Error::InvalidFanout(fanout));
        }
        Ok(Self {
            node_bytes,
            tree: MultiwayTree::new(&keys, fanout),
        })
    }

    pub fn fanout(&self) -> usize {
        self.tree.fanout()
    }

    pub fn height(&self) -> usize {
        self.tree.height()
    }

    pub fn node_bytes(&self) -> usize {
        self.node_bytes
    }
}

impl<K: Key> RankIndex<K> for MultiwayBaseline<K> {
    fn name(&self) -> String {
        format!("multiway-{}B", self.node_bytes)
    }

    fn keys(&self) -> &[K] {
        self.tree.bottom()
    }

    fn index_bytes(&self) -> u64 {
        (self.tree.internal_entries() * MULTIWAY_ENTRY_BYTES) as u64
    }

    fn lower_bound(&self, q: K) -> usize {
        self.tree.count_lt(q)
    }

    fn upper_bound(&self, q: K) -> usize {
        self.tree.count_le(q)
    }
}

impl<K: Key> RankIndex<K> for PgmIndex<K> {
    fn name(&self) -> String {
        let m = self.model();
        format!("pgm-{}-eps{}", m.router().name(), m.eps_last())
    }

    fn keys(&self) -> &[K] {
        PgmIndex::keys(self)
    }

    fn index_bytes(&self) -> u64 {
        self.stats().bytes
    }

    fn lower_bound(&self, q: K) -> usize {
        PgmIndex::lower_bound(self, q)
    }

    fn upper_bound(&self, q: K) -> usize {
        PgmIndex::upper_bound(self, q)
    }

    fn predicted_rank(&self, q: K) -> Option<usize> {
        Some(self.approx_range(q).pos)
    }

    fn lookup(&self, q: K) -> QueryResult {
        PgmIndex::lookup(self, q)
    }

    fn predecessor(&self, q: K) -> QueryResult {
        PgmIndex::predecessor(self, q)
    }

    fn successor(&self, q: K) -> QueryResult {
        PgmIndex::successor(self, q)
    }

    fn range_query(&self, lo: K, hi: K) -> Range<usize> {
        PgmIndex::range_query(self, lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexConfig;

    #[test]
    fn fanout_from_node_size() {
        // 128 / 24 = 5 remainder 8.
        assert_eq!(MultiwayBaseline::<u64>::fanout_for(128), 5);
        assert_eq!(MultiwayBaseline::<u64>::fanout_for(4096), 170);
        assert_eq!(
            MultiwayBaseline::new(vec![1u64], 40).unwrap_err(),
            Error::InvalidFanout(1)
        );
    }

    #[test]
    fn multiway_bytes_count_internal_entries() {
        let keys: Vec<u64> = (0..125).collect();
        let b = MultiwayBaseline::new(keys, 128).unwrap();
        assert_eq!(b.fanout(), 5);
        assert_eq!(b.index_bytes(), (25 + 5) * 24);
    }

    #[test]
    fn single_key_answers_agree() {
        let keys = vec![10u64];
        let arr = SortedArray::new(keys.clone()).unwrap();
        let mw = MultiwayBaseline::new(keys.clone(), 128).unwrap();
        let pgm = PgmIndex::build(keys, &IndexConfig::default()).unwrap();
        let all: [&dyn RankIndex<u64>; 3] = [&arr, &mw, &pgm];
        for q in [0u64, 9, 10, 11, u64::MAX] {
            let expect = (arr.lookup(q), arr.predecessor(q), arr.successor(q), arr.range_query(q, q.saturating_add(1)));
            for s in all {
                assert_eq!(
                    (s.lookup(q), s.predecessor(q), s.successor(q), s.range_query(q, q.saturating_add(1))),
                    expect,
                    "{}",
                    s.name()
                );
            }
        }
        assert_eq!(arr.lookup(10), QueryResult::Found(0));
        assert_eq!(arr.lookup(9), QueryResult::AbsentBelowMin);
        assert_eq!(arr.successor(11), QueryResult::AbsentAboveMax);
    }
}
