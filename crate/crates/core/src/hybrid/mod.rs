//! Piecewise approximations that mix linear and nonlinear models.
//!
//! [`top_down_regression`] fits the whole key range with the simplest family
//! member that stays within ε of every rank, splitting the range at a
//! breakpoint when none does.
//!
//! A fit is accepted only when the unrounded fit lies in the closed band
//! `[r - ε, r + ε]` around each rank `r`. That is the same admissibility the
//! optimal PLA builder works with, so a linear-only family can never beat it,
//! and it implies the floored error bound. Stored pieces carry the fit plus
//! one half, so their floored prediction is the rounded fit. A final [`merge`] pass joins adjacent pieces
//! whenever a single refit covers both.

mod family;

pub use family::{Fitted, ModelKind};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::key::{validate_sorted, Key};
use crate::{Error, Result};

/// Members tried on each range, simplest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFamily {
    members: Vec<ModelKind>,
    seed: u64,
}

impl Default for ModelFamily {
    fn default() -> Self {
        Self {
            members: vec![ModelKind::Linear, ModelKind::Quadratic, ModelKind::Cubic],
            seed: 42,
        }
    }
}

impl ModelFamily {
    /// Members are sorted by complexity; the linear model must be included.
    pub fn new(mut members: Vec<ModelKind>, seed: u64) -> Result<Self> {
        members.sort();
        members.dedup();
        if members.first() != Some(&ModelKind::Linear) {
            return Err(Error::EmptyFamily);
        }
        Ok(Self { members, seed })
    }

    pub fn linear_only() -> Self {
        Self {
            members: vec![ModelKind::Linear],
            seed: 42,
        }
    }

    pub fn with_perceptron(mut self) -> Self {
        if !self.members.contains(&ModelKind::Perceptron) {
            self.members.push(ModelKind::Perceptron);
        }
        self
    }

    pub fn members(&self) -> &[ModelKind] {
        &self.members
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BreakpointStrategy {
    Midpoint,
    Random { seed: u64 },
    Argmax,
    #[default]
    LongestChain,
}

impl BreakpointStrategy {
    pub fn name(self) -> &'static str {
        match self {
            BreakpointStrategy::Midpoint => "midpoint",
            BreakpointStrategy::Random { .. } => "random",
            BreakpointStrategy::Argmax => "argmax",
            BreakpointStrategy::LongestChain => "longest_chain",
        }
    }
}

/// Split positions, relative to the start of the failing range. `One(p)`
/// splits into `[0, p]` and `[p + 1, len)`; `Two(s, e)` isolates `[s, e]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Breakpoints {
    One(usize),
    Two(usize, usize),
}

/// One model of a [`PnaModel`], covering keys from `first_key` on.
#[derive(Debug, Clone, PartialEq)]
pub struct PnaPiece<K> {
    pub first_key: K,
    pub model: Fitted,
    /// Maps `k - first_key` onto the fitting abscissa.
    pub inv_span: f64,
    /// Distinct-key indices covered, inclusive.
    start: usize,
    end: usize,
}

impl<K: Key> PnaPiece<K> {
    #[inline]
    pub fn eval(&self, k: K) -> f64 {
        self.model.eval(k.offset_from(self.first_key) * self.inv_span)
    }

    #[inline]
    pub fn predict(&self, k: K) -> i64 {
        self.eval(k).floor() as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnaModel<K> {
    pieces: Vec<PnaPiece<K>>,
    epsilon: u32,
    n_keys: usize,
}

impl<K: Key> PnaModel<K> {
    pub fn pieces(&self) -> &[PnaPiece<K>] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn epsilon(&self) -> u32 {
        self.epsilon
    }

    pub fn n_keys(&self) -> usize {
        self.n_keys
    }

    /// Total parameter count of the pieces.
    pub fn cost(&self) -> usize {
        self.pieces.iter().map(|p| p.model.kind.param_count()).sum()
    }

    pub fn piece_for(&self, k: K) -> usize {
        self.pieces
            .partition_point(|p| p.first_key <= k)
            .saturating_sub(1)
    }

    pub fn predict(&self, k: K) -> i64 {
        self.pieces[self.piece_for(k)].predict(k)
    }

    /// Largest `|⌊f(k)⌋ - rank(k)|` over `keys`, rank being the first
    /// occurrence.
    pub fn max_error(&self, keys: &[K]) -> u64 {
        let mut worst = 0;
        let mut first = 0;
        for (i, &k) in keys.iter().enumerate() {
            if i == 0 || keys[i - 1] != k {
                first = i;
            }
            worst = worst.max((self.predict(k) - first as i64).unsigned_abs());
        }
        worst
    }
}

/// Distinct keys with their first-occurrence ranks.
struct Points<K> {
    x: Vec<K>,
    y: Vec<f64>,
}

impl<K: Key> Points<K> {
    fn new(keys: &[K]) -> Self {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, &k) in keys.iter().enumerate() {
            if i == 0 || keys[i - 1] != k {
                x.push(k);
                y.push(i as f64);
            }
        }
        Self { x, y }
    }

    fn fit(&self, kind: ModelKind, a: usize, b: usize, seed: u64) -> PnaPiece<K> {
        let origin = self.x[a];
        let span = self.x[b].offset_from(origin);
        let inv_span = if span > 0.0 { 1.0 / span } else { 0.0 };
        let t: Vec<f64> = self.x[a..=b]
            .iter()
            .map(|k| k.offset_from(origin) * inv_span)
            .collect();
        PnaPiece {
            first_key: origin,
            model: family::fit(kind, &t, &self.y[a..=b], seed),
            inv_span,
            start: a,
            end: b,
        }
    }

    /// Whether the unrounded fit is within `eps` of every rank in `a..=b`.
    fn within_band(&self, piece: &PnaPiece<K>, a: usize, b: usize, eps: u64) -> bool {
        let eps = eps as f64;
        (a..=b).all(|i| (piece.eval(self.x[i]) - 0.5 - self.y[i]).abs() <= eps)
    }

    fn errors(&self, piece: &PnaPiece<K>, a: usize, b: usize) -> Vec<u64> {
        (a..=b)
            .map(|i| (piece.predict(self.x[i]) - self.y[i] as i64).unsigned_abs())
            .collect()
    }
}

/// Floored absolute rank errors of `piece` on `keys[range]`, ranks being
/// first-occurrence positions in `keys`.
pub fn compute_errors<K: Key>(
    keys: &[K],
    range: std::ops::RangeInclusive<usize>,
    piece: &PnaPiece<K>,
) -> Vec<u64> {
    let (a, b) = (*range.start(), *range.end());
    let mut first = keys.partition_point(|k| *k < keys[a]);
    (a..=b)
        .map(|i| {
            if i > a && keys[i - 1] != keys[i] {
                first = i;
            }
            (piece.predict(keys[i]) - first as i64).unsigned_abs()
        })
        .collect()
}

/// Where to split a range whose best model still exceeds `epsilon`.
/// `errors` must have at least two entries.
pub fn choose_breakpoint(
    errors: &[u64],
    epsilon: u32,
    strategy: BreakpointStrategy,
    rng: &mut ChaCha8Rng,
) -> Breakpoints {
    let len = errors.len();
    debug_assert!(len >= 2);
    let midpoint = Breakpoints::One((len - 1) / 2);
    match strategy {
        BreakpointStrategy::Midpoint => midpoint,
        BreakpointStrategy::Random { .. } => Breakpoints::One(rng.random_range(0..len - 1)),
        BreakpointStrategy::Argmax => {
            let mut best = 0;
            for (i, &e) in errors.iter().enumerate() {
                if e > errors[best] {
                    best = i;
                }
            }
            Breakpoints::One(best.min(len - 2))
        }
        BreakpointStrategy::LongestChain => {
            let eps = epsilon as u64;
            let (mut best, mut best_len) = ((0, 0), 0);
            let mut i = 0;
            while i < len {
                if errors[i] > eps {
                    let s = i;
                    while i + 1 < len && errors[i + 1] > eps {
                        i += 1;
                    }
                    if i + 1 - s > best_len {
                        best_len = i + 1 - s;
                        best = (s, i);
                    }
                }
                i += 1;
            }
            if best_len == 0 || best_len == len {
                midpoint
            } else {
                Breakpoints::Two(best.0, best.1)
            }
        }
    }
}

fn check_inputs<K: Key>(keys: &[K], epsilon: u32) -> Result<()> {
    if epsilon == 0 || epsilon > i32::MAX as u32 {
        return Err(Error::EpsilonOutOfRange(epsilon as u64));
    }
    validate_sorted(keys)
}

/// Top-down segmentation with the given family and breakpoint strategy,
/// followed by [`merge`].
pub fn top_down_regression<K: Key>(
    keys: &[K],
    epsilon: u32,
    family: &ModelFamily,
    strategy: BreakpointStrategy,
) -> Result<PnaModel<K>> {
    let split = top_down_split(keys, epsilon, family, strategy)?;
    merge(split, keys, family)
}

/// The top-down pass alone, without merging.
pub fn top_down_split<K: Key>(
    keys: &[K],
    epsilon: u32,
    family: &ModelFamily,
    strategy: BreakpointStrategy,
) -> Result<PnaModel<K>> {
    check_inputs(keys, epsilon)?;
    let pts = Points::new(keys);
    let eps = epsilon as u64;
    let seed = match strategy {
        BreakpointStrategy::Random { seed } => seed,
        _ => family.seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pieces = Vec::new();
    let mut stack = vec![(0usize, pts.x.len() - 1)];

    while let Some((a, b)) = stack.pop() {
        let mut last_errors = Vec::new();
        let mut accepted = None;
        for &kind in &family.members {
            let piece = pts.fit(kind, a, b, family.seed);
            if pts.within_band(&piece, a, b, eps) {
                accepted = Some(piece);
                break;
            }
            last_errors = pts.errors(&piece, a, b);
        }
        if let Some(p) = accepted {
            pieces.push(p);
            continue;
        }
        if a == b {
            // A lone point is fitted exactly by the linear member.
            unreachable!("single point not fitted");
        }
        let mut parts = match choose_breakpoint(&last_errors, epsilon, strategy, &mut rng) {
            Breakpoints::One(p) => vec![(a, a + p), (a + p + 1, b)],
            Breakpoints::Two(s, e) => {
                let mut v = Vec::with_capacity(3);
                if s > 0 {
                    v.push((a, a + s - 1));
                }
                v.push((a + s, a + e));
                if a + e < b {
                    v.push((a + e + 1, b));
                }
                v
            }
        };
        parts.reverse();
        stack.extend(parts);
    }

    Ok(PnaModel {
        pieces,
        epsilon,
        n_keys: keys.len(),
    })
}

/// Joins neighbouring pieces left to right whenever a refit of the union,
/// using the more complex of the two models, stays within ε.
pub fn merge<K: Key>(
    model: PnaModel<K>,
    keys: &[K],
    family: &ModelFamily,
) -> Result<PnaModel<K>> {
    check_inputs(keys, model.epsilon)?;
    let pts = Points::new(keys);
    let eps = model.epsilon as u64;
    let mut out: Vec<PnaPiece<K>> = Vec::with_capacity(model.pieces.len());
    for piece in model.pieces {
        if let Some(last) = out.last() {
            let kind = last.model.kind.max(piece.model.kind);
            let (a, b) = (last.start, piece.end);
            let joined = pts.fit(kind, a, b, family.seed);
            if pts.within_band(&joined, a, b, eps) {
                *out.last_mut().unwrap() = joined;
                continue;
            }
        }
        out.push(piece);
    }
    Ok(PnaModel {
        pieces: out,
        epsilon: model.epsilon,
        n_keys: model.n_keys,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn breakpoint_examples() {
        assert_eq!(
            choose_breakpoint(&[0, 0, 9, 9, 9, 0], 1, BreakpointStrategy::LongestChain, &mut rng()),
            Breakpoints::Two(2, 4)
        );
        assert_eq!(
            choose_breakpoint(&[0, 5, 0], 1, BreakpointStrategy::Argmax, &mut rng()),
            Breakpoints::One(1)
        );
        // Two equally long runs: the leftmost wins.
        assert_eq!(
            choose_breakpoint(&[3, 3, 0, 3, 3, 0], 1, BreakpointStrategy::LongestChain, &mut rng()),
            Breakpoints::Two(0, 1)
        );
        assert_eq!(
            choose_breakpoint(&[0; 7], 1, BreakpointStrategy::Midpoint, &mut rng()),
            Breakpoints::One(3)
        );
        for _ in 0..50 {
            match choose_breakpoint(&[9; 5], 1, BreakpointStrategy::Random { seed: 3 }, &mut rng()) {
                Breakpoints::One(p) => assert!(p < 4),
                b => panic!("{b:?}"),
            }
        }
    }

    #[test]
    fn linear_keys_give_one_piece() {
        let keys: Vec<u64> = (0..1000).map(|i| 5 * i + 3).collect();
        let m = top_down_regression(&keys, 1, &ModelFamily::default(), BreakpointStrategy::default())
            .unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.pieces()[0].model.kind, ModelKind::Linear);
    }

    #[test]
    fn compute_errors_examples() {
        let keys: Vec<u64> = (0..11).collect();
        let pts = Points::new(&keys);
        let exact = pts.fit(ModelKind::Linear, 0, 10, 0);
        assert!(compute_errors(&keys, 0..=10, &exact).iter().all(|&e| e == 0));
        // Constant at the middle rank: errors fall to 0 and rise again.
        let flat = PnaPiece {
            first_key: 0u64,
            model: Fitted {
                kind: ModelKind::Linear,
                params: vec![5.0, 0.0],
            },
            inv_span: 0.1,
            start: 0,
            end: 10,
        };
        assert_eq!(
            compute_errors(&keys, 0..=10, &flat),
            vec![5, 4, 3, 2, 1, 0, 1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn merge_joins_split_line() {
        let keys: Vec<u64> = (0..400).map(|i| 3 * i).collect();
        let pts = Points::new(&keys);
        let split = PnaModel {
            pieces: vec![
                pts.fit(ModelKind::Linear, 0, 199, 0),
                pts.fit(ModelKind::Linear, 200, 399, 0),
            ],
            epsilon: 1,
            n_keys: 400,
        };
        let merged = merge(split, &keys, &ModelFamily::default()).unwrap();
        assert_eq!(merged.len(), 1);
    }

    #[test]
    fn merge_keeps_incompatible_pieces() {
        let mut keys: Vec<u64> = (0..100).collect();
        keys.extend((0..100).map(|i| 1000 + 50 * i));
        let pts = Points::new(&keys);
        let split = PnaModel {
            pieces: vec![
                pts.fit(ModelKind::Linear, 0, 99, 0),
                pts.fit(ModelKind::Linear, 100, 199, 0),
            ],
            epsilon: 1,
            n_keys: 200,
        };
        let merged = merge(split, &keys, &ModelFamily::linear_only()).unwrap();
        assert_eq!(merged.len(), 2);
    }
}
