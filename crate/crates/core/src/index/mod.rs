//! Indexes assembled from PLA levels.
//!
//! A [`PgmModel`] holds the learned part of an index: one or more levels of
//! segments plus the router that picks the leaf segment for a query. A
//! [`PgmIndex`] pairs a model with the sorted keys it was built over and
//! answers exact rank queries.

mod multiway;
mod query;
mod search;
mod serial;

pub use multiway::MultiwayTree;
pub use query::{ApproxRange, LevelStep, QueryResult, SearchMode};
pub use serial::{read_header, IndexHeader, HEADER_BYTES, MAGIC, SEGMENT_BYTES, VERSION};

use crate::key::{validate_sorted, Key};
use crate::pla::{build_optimal_pla, PlaModel};
use crate::{Error, Result};

/// How a query reaches its leaf segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Router {
    /// Binary search over the leaf segments' first keys.
    Binary,
    /// Static multiway tree over the leaf segments' first keys.
    Multiway { fanout: u32 },
    /// Stacked PLA levels down to a single root segment.
    Recursive,
    /// Recursive levels built on access probabilities, searched
    /// exponentially from each prediction.
    DistributionAware,
}

impl Router {
    pub fn tag(self) -> u8 {
        match self {
            Router::Binary => 0,
            Router::Multiway { .. } => 1,
            Router::Recursive => 2,
            Router::DistributionAware => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Router::Binary => "binary",
            Router::Multiway { .. } => "multiway",
            Router::Recursive => "recursive",
            Router::DistributionAware => "distribution-aware",
        }
    }
}

pub const DEFAULT_EPS_INTERNAL: u32 = 4;

/// Build parameters. The multiway fanout defaults to `2 * eps_internal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexConfig {
    pub eps_last: u32,
    pub eps_internal: u32,
    pub router: Router,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            eps_last: 64,
            eps_internal: DEFAULT_EPS_INTERNAL,
            router: Router::Recursive,
        }
    }
}

impl IndexConfig {
    pub fn recursive(eps_last: u32) -> Self {
        Self {
            eps_last,
            ..Self::default()
        }
    }

    pub fn with_router(mut self, router: Router) -> Self {
        self.router = router;
        self
    }

    pub fn default_fanout(eps_internal: u32) -> u32 {
        (2 * eps_internal).max(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct IndexStats {
    pub levels: usize,
    pub segments_per_level: Vec<usize>,
    pub total_segments: usize,
    /// Serialized size of the model.
    pub bytes: u64,
}

/// The learned part of an index, independent of the key array.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmModel<K> {
    /// `levels[0]` is the top level; the last level predicts key ranks.
    levels: Vec<PlaModel<K>>,
    eps_last: u32,
    eps_internal: u32,
    router: Router,
    key_count: usize,
    tree: Option<MultiwayTree<K>>,
}

impl<K: Key> PgmModel<K> {
    /// Builds the model over `keys` (sorted, duplicates allowed).
    pub fn build(keys: &[K], config: &IndexConfig) -> Result<Self> {
        validate_sorted(keys)?;
        let eps_last = config.eps_last;
        let eps_internal = config.eps_internal;
        let leaf = build_optimal_pla(keys, eps_last)?;
        match config.router {
            Router::Binary => Self::from_levels(vec![leaf], eps_last, eps_internal, Router::Binary),
            Router::Multiway { fanout } => {
                if fanout < 2 {
                    return Err(Error::InvalidFanout(fanout as usize));
                }
                Self::from_levels(vec![leaf], eps_last, fanout, config.router)
            }
            Router::Recursive => {
                if eps_internal == 0 {
                    return Err(Error::EpsilonOutOfRange(0));
                }
                let mut levels = vec![leaf];
                loop {
                    let top = levels.last().unwrap();
                    if top.len() == 1 && levels.len() >= 2 {
                        break;
                    }
                    let firsts: Vec<K> = top.segments().iter().map(|s| s.first_key).collect();
                    levels.push(build_optimal_pla(&firsts, eps_internal)?);
                }
                levels.reverse();
                Self::from_levels(levels, eps_last, eps_internal, Router::Recursive)
            }
            Router::DistributionAware => Err(Error::InvalidRequest(
                "distribution-aware models are built from a query distribution".into(),
            )),
        }
    }

    /// Assembles a model from prebuilt levels. For the multiway router,
    /// `eps_internal` carries the fanout.
    pub(crate) fn from_levels(
        levels: Vec<PlaModel<K>>,
        eps_last: u32,
        eps_internal: u32,
        router: Router,
    ) -> Result<Self> {
        let key_count = levels.last().map(|l| l.n_keys()).unwrap_or(0);
        let tree = match router {
            Router::Multiway { fanout } => {
                let firsts: Vec<K> = levels
                    .last()
                    .unwrap()
                    .segments()
                    .iter()
                    .map(|s| s.first_key)
                    .collect();
                Some(MultiwayTree::new(&firsts, fanout as usize))
            }
            _ => None,
        };
        Ok(Self {
            levels,
            eps_last,
            eps_internal,
            router,
            key_count,
            tree,
        })
    }

    pub fn levels(&self) -> &[PlaModel<K>] {
        &self.levels
    }

    pub fn leaf(&self) -> &PlaModel<K> {
        self.levels.last().unwrap()
    }

    pub fn eps_last(&self) -> u32 {
        self.eps_last
    }

    pub fn eps_internal(&self) -> u32 {
        self.eps_internal
    }

    pub fn router(&self) -> Router {
        self.router
    }

    pub fn key_count(&self) -> usize {
        self.key_count
    }

    pub fn multiway_tree(&self) -> Option<&MultiwayTree<K>> {
        self.tree.as_ref()
    }

    pub fn stats(&self) -> IndexStats {
        let segments_per_level: Vec<usize> = self.levels.iter().map(|l| l.len()).collect();
        let total_segments = segments_per_level.iter().sum();
        IndexStats {
            levels: self.levels.len(),
            bytes: serial::serialized_len(&segments_per_level),
            segments_per_level,
            total_segments,
        }
    }
}

/// A model together with the keys it indexes.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmIndex<K> {
    model: PgmModel<K>,
    keys: Vec<K>,
    search: SearchMode,
}

impl<K: Key> PgmIndex<K> {
    pub fn build(keys: Vec<K>, config: &IndexConfig) -> Result<Self> {
        let model = PgmModel::build(&keys, config)?;
        Ok(Self {
            model,
            keys,
            search: SearchMode::Binary,
        })
    }

    /// Attaches `keys` to a model built (or loaded) for them.
    pub fn from_model(model: PgmModel<K>, keys: Vec<K>) -> Result<Self> {
        if model.key_count() != keys.len() {
            return Err(Error::Corrupt(format!(
                "index covers {} keys, dataset has {}",
                model.key_count(),
                keys.len()
            )));
        }
        validate_sorted(&keys)?;
        let search = if model.router() == Router::DistributionAware {
            SearchMode::Exponential
        } else {
            SearchMode::Binary
        };
        Ok(Self {
            model,
            keys,
            search,
        })
    }

    /// Selects how the final window is searched. Not persisted.
    pub fn set_search_mode(&mut self, mode: SearchMode) {
        self.search = mode;
    }

    pub fn search_mode(&self) -> SearchMode {
        self.search
    }

    pub fn model(&self) -> &PgmModel<K> {
        &self.model
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn stats(&self) -> IndexStats {
        self.model.stats()
    }

    pub fn serialize(&self) -> Vec<u8> {
        self.model.serialize()
    }

    pub fn deserialize(bytes: &[u8], keys: Vec<K>) -> Result<Self> {
        Self::from_model(PgmModel::deserialize(bytes)?, keys)
    }

    pub fn into_keys(self) -> Vec<K> {
        self.keys
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_data_has_two_levels() {
        let keys: Vec<u64> = (0..1_000_000).collect();
        let idx = PgmIndex::build(keys, &IndexConfig::recursive(8)).unwrap();
        let st = idx.stats();
        assert_eq!(st.levels, 2);
        assert_eq!(st.total_segments, 2);
        assert_eq!(st.segments_per_level, vec![1, 1]);
    }

    #[test]
    fn build_errors() {
        let cfg = IndexConfig::default();
        assert_eq!(
            PgmIndex::<u64>::build(vec![], &cfg).unwrap_err(),
            Error::EmptyDataset
        );
        let bad = cfg.with_router(Router::Multiway { fanout: 1 });
        assert_eq!(
            PgmIndex::build(vec![1u64], &bad).unwrap_err(),
            Error::InvalidFanout(1)
        );
    }

    #[test]
    fn level_sizes_shrink_to_one_root() {
        let mut x = 7u64;
        let mut k = 0u64;
        let keys: Vec<u64> = (0..100_000)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                k += 1 + (x % 5000);
                k
            })
            .collect();
        let idx = PgmIndex::build(keys, &IndexConfig::recursive(64)).unwrap();
        let st = idx.stats();
        assert_eq!(st.segments_per_level[0], 1);
        assert!(st.segments_per_level.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            st.total_segments,
            st.segments_per_level.iter().sum::<usize>()
        );
    }
}
