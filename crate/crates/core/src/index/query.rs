use std::ops::Range;

use super::search::{boundary_exponential, boundary_near};
use super::{PgmIndex, PgmModel, Router};
use crate::key::Key;
use crate::pla::PlaModel;

/// Predicted rank of a key and the window it was promised to lie in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApproxRange {
    pub pos: usize,
    /// Inclusive.
    pub lo: usize,
    /// Inclusive.
    pub hi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryResult {
    Found(usize),
    Predecessor(usize),
    Successor(usize),
    AbsentBelowMin,
    AbsentAboveMax,
}

impl QueryResult {
    pub fn rank(self) -> Option<usize> {
        match self {
            QueryResult::Found(r) | QueryResult::Predecessor(r) | QueryResult::Successor(r) => {
                Some(r)
            }
            _ => None,
        }
    }
}

/// Search used inside the final window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    Binary,
    Exponential,
}

/// One routing step of a descent through the levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelStep {
    /// Level whose segment made the prediction.
    pub level: usize,
    pub predicted: usize,
    /// Segments of the next level that were compared against the query.
    pub searched: (usize, usize),
    pub chosen: usize,
    /// Whether `chosen` was found without widening the search, i.e. it is a
    /// searched segment or the one right before them.
    pub within_window: bool,
}

/// Floored prediction of segment `s` of `level`, never past the position the
/// next segment predicts for its own first key, clamped to `[0, n_keys - 1]`.
fn clamped_prediction<K: Key>(level: &PlaModel<K>, s: usize, q: K) -> usize {
    let segs = level.segments();
    let mut p = segs[s].predict(q);
    if let Some(g) = segs.get(s + 1) {
        p = p.min(g.intercept.floor() as i64 - 1);
    }
    p.clamp(0, level.n_keys() as i64 - 1) as usize
}

impl<K: Key> PgmModel<K> {
    /// Routes `q` to a leaf segment. Internal windows hold `2 * eps + 1`
    /// segments around the prediction; the answer is the rightmost of them
    /// with `first_key <= q`, or the segment just before the window.
    fn route(&self, q: K, mut trace: Option<&mut Vec<LevelStep>>) -> (usize, u64) {
        let leaf = self.leaf();
        match self.router {
            Router::Binary => (leaf.segment_for(q), 0),
            Router::Multiway { .. } => (self.tree.as_ref().unwrap().search(q), 0),
            Router::Recursive | Router::DistributionAware => {
                let exponential = self.router == Router::DistributionAware;
                let mut s = 0usize;
                let mut steps = 0u64;
                for (l, level) in self.levels[..self.levels.len() - 1].iter().enumerate() {
                    let next = self.levels[l + 1].segments();
                    let m = next.len();
                    let pos = clamped_prediction(level, s, q);
                    let le = |i: usize| next[i].first_key <= q;
                    let eps = level.epsilon() as usize;
                    let (lo, hi) = (pos.saturating_sub(eps), (pos + eps).min(m - 1));
                    let b = if exponential {
                        let (b, st) = boundary_exponential(m, pos, le);
                        steps += st;
                        b
                    } else {
                        boundary_near(m, lo, hi, le)
                    };
                    let chosen = b.saturating_sub(1);
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(LevelStep {
                            level: l,
                            predicted: pos,
                            searched: (lo, hi),
                            chosen,
                            within_window: chosen + 1 >= lo && chosen <= hi,
                        });
                    }
                    s = chosen;
                }
                (s, steps)
            }
        }
    }

    /// Window of leaf positions around the prediction for `q`. For every
    /// indexed key the rank of its first occurrence lies in `[lo, hi]`.
    pub fn approx_range(&self, q: K) -> ApproxRange {
        self.approx_range_traced(q, None).0
    }

    /// Like [`approx_range`](Self::approx_range), recording each routing
    /// step and returning the number of comparisons spent routing.
    pub fn approx_range_traced(
        &self,
        q: K,
        trace: Option<&mut Vec<LevelStep>>,
    ) -> (ApproxRange, u64) {
        let (s, steps) = self.route(q, trace);
        let pos = clamped_prediction(self.leaf(), s, q);
        let eps = self.eps_last as usize;
        let range = ApproxRange {
            pos,
            lo: pos.saturating_sub(eps),
            hi: (pos + eps).min(self.key_count - 1),
        };
        (range, steps)
    }
}

impl<K: Key> PgmIndex<K> {
    pub fn approx_range(&self, q: K) -> ApproxRange {
        self.model.approx_range(q)
    }

    /// First position whose key is `>= q`, or `> q` when `strict`, and the
    /// comparisons spent finding it.
    fn boundary(&self, q: K, strict: bool) -> (usize, u64) {
        let keys = &self.keys;
        let (r, route_steps) = self.model.approx_range_traced(q, None);
        let pred = |i: usize| {
            if strict {
                keys[i] <= q
            } else {
                keys[i] < q
            }
        };
        match self.search {
            SearchMode::Binary => (boundary_near(keys.len(), r.lo, r.hi, pred), route_steps),
            SearchMode::Exponential => {
                let (b, st) = boundary_exponential(keys.len(), r.pos, pred);
                (b, route_steps + st)
            }
        }
    }

    pub fn lower_bound(&self, q: K) -> usize {
        self.boundary(q, false).0
    }

    pub fn upper_bound(&self, q: K) -> usize {
        self.boundary(q, true).0
    }

    /// First occurrence of `q` if present, otherwise the rank of the
    /// rightmost key below it.
    pub fn lookup(&self, q: K) -> QueryResult {
        self.lookup_with_steps(q).0
    }

    /// [`lookup`](Self::lookup) together with the number of key and segment
    /// comparisons made along the way.
    pub fn lookup_with_steps(&self, q: K) -> (QueryResult, u64) {
        let (b, steps) = self.boundary(q, false);
        let res = if b < self.keys.len() && self.keys[b] == q {
            QueryResult::Found(b)
        } else if b == 0 {
            QueryResult::AbsentBelowMin
        } else {
            QueryResult::Predecessor(b - 1)
        };
        (res, steps)
    }

    /// Rightmost position whose key is `<= q`.
    pub fn predecessor(&self, q: K) -> QueryResult {
        let b = self.upper_bound(q);
        if b == 0 {
            QueryResult::AbsentBelowMin
        } else if self.keys[b - 1] == q {
            QueryResult::Found(b - 1)
        } else {
            QueryResult::Predecessor(b - 1)
        }
    }

    /// Leftmost position whose key is `>= q`.
    pub fn successor(&self, q: K) -> QueryResult {
        let b = self.lower_bound(q);
        if b == self.keys.len() {
            QueryResult::AbsentAboveMax
        } else if self.keys[b] == q {
            QueryResult::Found(b)
        } else {
            QueryResult::Successor(b)
        }
    }

    /// Positions of the keys in `[lo, hi]`.
    pub fn range_query(&self, lo: K, hi: K) -> Range<usize> {
        if !(lo <= hi) {
            return 0..0;
        }
        let start = self.lower_bound(lo);
        let end = self.upper_bound(hi);
        start..end.max(start)
    }
}

#[cfg(test)]
mod tests {
    use super::super::IndexConfig;
    use super::*;

    #[test]
    fn footnote_examples() {
        for router in [
            Router::Binary,
            Router::Multiway { fanout: 8 },
            Router::Recursive,
        ] {
            let idx = PgmIndex::build(vec![2u64, 5, 9], &IndexConfig::recursive(1).with_router(router))
                .unwrap();
            assert_eq!(idx.successor(5), QueryResult::Found(1));
            assert_eq!(idx.predecessor(4), QueryResult::Predecessor(0));
            assert_eq!(idx.successor(10), QueryResult::AbsentAboveMax);
            assert_eq!(idx.predecessor(1), QueryResult::AbsentBelowMin);
            assert_eq!(idx.lookup(6), QueryResult::Predecessor(1));
            assert_eq!(idx.range_query(0, 100), 0..3);
            assert_eq!(idx.range_query(6, 8), 2..2);
        }
    }

    #[test]
    fn single_key_range() {
        let idx = PgmIndex::build(vec![42u64], &IndexConfig::recursive(16)).unwrap();
        for q in [0, 42, u64::MAX] {
            assert_eq!(idx.approx_range(q), ApproxRange { pos: 0, lo: 0, hi: 0 });
        }
    }

    #[test]
    fn exponential_search_agrees() {
        let keys: Vec<u64> = (0..5000u64).map(|i| i * i / 7).collect();
        let mut idx = PgmIndex::build(keys.clone(), &IndexConfig::recursive(4)).unwrap();
        idx.set_search_mode(SearchMode::Exponential);
        for q in 0..(keys[4999] + 3) {
            if q % 97 != 0 {
                continue;
            }
            let b = keys.partition_point(|&k| k < q);
            assert_eq!(idx.lower_bound(q), b);
        }
    }
}
