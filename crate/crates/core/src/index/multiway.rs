//! Static multiway search tree over sorted keys, laid out level by level.

use crate::key::Key;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiwayTree<K> {
    fanout: usize,
    /// `layers[0]` is the root node; the last layer holds every key.
    layers: Vec<Vec<K>>,
}

impl<K: Key> MultiwayTree<K> {
    /// `keys` must be sorted and nonempty, `fanout >= 2`.
    pub fn new(keys: &[K], fanout: usize) -> Self {
        debug_assert!(fanout >= 2 && !keys.is_empty());
        let mut layers = vec![keys.to_vec()];
        while layers.last().unwrap().len() > fanout {
            let below = layers.last().unwrap();
            layers.push(below.iter().step_by(fanout).copied().collect());
        }
        layers.reverse();
        Self { fanout, layers }
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn height(&self) -> usize {
        self.layers.len()
    }

    /// The keys the tree was built over.
    pub fn bottom(&self) -> &[K] {
        self.layers.last().unwrap()
    }

    /// Keys stored above the bottom layer.
    pub fn internal_entries(&self) -> usize {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(Vec::len)
            .sum()
    }

    /// Index of the rightmost bottom key `<= q`, or 0 when `q` is smaller
    /// than every key.
    pub fn search(&self, q: K) -> usize {
        self.count_prefix(|k| k <= q).saturating_sub(1)
    }

    /// Number of bottom keys `<= q`.
    pub fn count_le(&self, q: K) -> usize {
        self.count_prefix(|k| k <= q)
    }

    /// Number of bottom keys `< q`.
    pub fn count_lt(&self, q: K) -> usize {
        self.count_prefix(|k| k < q)
    }

    /// Length of the prefix of the bottom layer satisfying `pred`, which must
    /// hold on a prefix of every layer.
    fn count_prefix(&self, pred: impl Fn(K) -> bool) -> usize {
        let mut idx = 0usize;
        let depth_max = self.layers.len() - 1;
        for (depth, layer) in self.layers.iter().enumerate() {
            let start = if depth == 0 { 0 } else { idx * self.fanout };
            let end = if depth == 0 {
                layer.len()
            } else {
                (start + self.fanout).min(layer.len())
            };
            let c = layer[start..end].iter().take_while(|&&k| pred(k)).count();
            if depth == depth_max {
                return start + c;
            }
            if c == 0 {
                return 0;
            }
            idx = start + c - 1;
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_partition_point() {
        let keys: Vec<u64> = (0..500).map(|i| i * 3 + 10).collect();
        for fanout in [2usize, 3, 5, 16, 600] {
            let t = MultiwayTree::new(&keys, fanout);
            for q in 0..1600u64 {
                let expect = keys.partition_point(|&k| k <= q).saturating_sub(1);
                assert_eq!(t.search(q), expect, "fanout {fanout} q {q}");
            }
        }
    }

    #[test]
    fn counts_with_duplicates() {
        let keys: Vec<u64> = (0..400).map(|i| i / 7 * 2).collect();
        for fanout in [2usize, 3, 8] {
            let t = MultiwayTree::new(&keys, fanout);
            for q in 0..130u64 {
                assert_eq!(t.count_le(q), keys.partition_point(|&k| k <= q));
                assert_eq!(t.count_lt(q), keys.partition_point(|&k| k < q));
            }
        }
    }

    #[test]
    fn shape() {
        let keys: Vec<u64> = (0..125).collect();
        let t = MultiwayTree::new(&keys, 5);
        assert_eq!(t.height(), 3);
        assert_eq!(t.internal_entries(), 25 + 5);
    }
}
