use super::hull::StreamingHull;
use super::{PlaModel, Point, Segment};
use crate::key::{validate_sorted, HullCoord, Key};
use crate::{Error, Result};

/// A sequence of points viewed through the bands a builder must stab.
///
/// `key(i)` returns `None` for entries that are not points of their own
/// (repeated keys, which share the point of their first occurrence).
pub(super) trait BandSource<K: Key> {
    type C: HullCoord;

    /// Added to the bisector's intercept before flooring.
    const SHIFT: f64;

    fn len(&self) -> usize;

    fn key(&self, i: usize) -> Option<K>;

    /// `(x, lo, hi)` hull coordinates of point `i` relative to `origin`.
    fn band(&self, i: usize, k: K, origin: K) -> (Self::C, Self::C, Self::C);

    /// Inclusive bounds the floored prediction of point `i` must respect.
    fn floor_bounds(&self, i: usize) -> (f64, f64);

    fn y(&self, i: usize) -> f64;
}

/// Keys with rank = first-occurrence position and a uniform integer band.
pub(super) struct SortedKeys<'a, K> {
    pub keys: &'a [K],
    pub eps: i64,
}

impl<K: Key> BandSource<K> for SortedKeys<'_, K> {
    type C = K::Coord;
    const SHIFT: f64 = 0.0;

    fn len(&self) -> usize {
        self.keys.len()
    }

    #[inline]
    fn key(&self, i: usize) -> Option<K> {
        let k = self.keys[i];
        if i > 0 && self.keys[i - 1] == k {
            None
        } else {
            Some(k)
        }
    }

    #[inline]
    fn band(&self, i: usize, k: K, origin: K) -> (K::Coord, K::Coord, K::Coord) {
        let y = i as i64;
        (
            k.hull_offset(origin),
            K::Coord::from_i64(y - self.eps),
            K::Coord::from_i64(y + self.eps),
        )
    }

    #[inline]
    fn floor_bounds(&self, i: usize) -> (f64, f64) {
        let y = i as i64;
        ((y - self.eps) as f64, (y + self.eps) as f64)
    }

    fn y(&self, i: usize) -> f64 {
        i as f64
    }
}

/// Explicit points sharing one integer band half-height.
struct UniformPoints<'a, K> {
    points: &'a [Point<K>],
    eps: i64,
}

impl<K: Key> BandSource<K> for UniformPoints<'_, K> {
    type C = K::Coord;
    const SHIFT: f64 = 0.0;

    fn len(&self) -> usize {
        self.points.len()
    }

    fn key(&self, i: usize) -> Option<K> {
        Some(self.points[i].x)
    }

    fn band(&self, i: usize, k: K, origin: K) -> (K::Coord, K::Coord, K::Coord) {
        let y = self.points[i].y as i64;
        (
            k.hull_offset(origin),
            K::Coord::from_i64(y - self.eps),
            K::Coord::from_i64(y + self.eps),
        )
    }

    fn floor_bounds(&self, i: usize) -> (f64, f64) {
        let y = self.points[i].y as i64;
        ((y - self.eps) as f64, (y + self.eps) as f64)
    }

    fn y(&self, i: usize) -> f64 {
        self.points[i].y as f64
    }
}

/// Explicit points with real-valued bands. The stored line is the bisector
/// shifted up by one half, so that flooring it rounds the bisector.
struct WeightedPoints<'a, K> {
    points: &'a [Point<K>],
}

impl<K: Key> BandSource<K> for WeightedPoints<'_, K> {
    type C = f64;
    const SHIFT: f64 = 0.5;

    fn len(&self) -> usize {
        self.points.len()
    }

    fn key(&self, i: usize) -> Option<K> {
        Some(self.points[i].x)
    }

    fn band(&self, i: usize, k: K, origin: K) -> (f64, f64, f64) {
        let p = &self.points[i];
        let y = p.y as f64;
        (k.offset_from(origin), y - p.y_range, y + p.y_range)
    }

    fn floor_bounds(&self, i: usize) -> (f64, f64) {
        let p = &self.points[i];
        let y = p.y as f64;
        (y - p.y_range - 0.5, y + p.y_range + 0.5)
    }

    fn y(&self, i: usize) -> f64 {
        self.points[i].y as f64
    }
}

/// Raises the intercept until every point in `[start, end)` floors at or
/// above its lower bound, then checks the upper bounds. Returns the first
/// point that still violates its bounds, if any.
pub(super) fn enforce_floor_bounds<K: Key, S: BandSource<K>>(
    src: &S,
    seg: &mut Segment<K>,
    start: usize,
    end: usize,
) -> std::result::Result<(), usize> {
    for _ in 0..8 {
        let mut deficit = 0.0f64;
        for i in start..end {
            let Some(k) = src.key(i) else { continue };
            let lo = src.floor_bounds(i).0.ceil();
            let v = seg.eval(k);
            if v < lo {
                deficit = deficit.max(lo - v);
            }
        }
        if deficit == 0.0 {
            break;
        }
        seg.intercept = (seg.intercept + deficit).max(seg.intercept.next_up());
    }
    for i in start..end {
        let Some(k) = src.key(i) else { continue };
        let (lo, hi) = src.floor_bounds(i);
        let p = seg.eval(k).floor();
        if p < lo.ceil() || p > hi.floor() {
            return Err(i);
        }
    }
    Ok(())
}

/// Greedy streaming segmentation: each segment absorbs points until the
/// hull rejects one, which then opens the next segment. Returns the segments
/// and the source index at which each one starts.
fn stream_segments<K: Key, S: BandSource<K>>(src: &S) -> (Vec<Segment<K>>, Vec<usize>) {
    let n = src.len();
    let mut hull = StreamingHull::<S::C>::new();
    let mut segments = Vec::new();
    let mut starts = Vec::new();
    let mut start = 0usize;

    while start < n {
        let Some(origin) = src.key(start) else {
            start += 1;
            continue;
        };
        hull.reset();
        let mut last_x: Option<S::C> = None;
        let mut end = start;
        while end < n {
            if let Some(k) = src.key(end) {
                let (x, lo, hi) = src.band(end, k, origin);
                // Float offsets can collapse for distinct keys; such a point
                // must open a segment of its own.
                if last_x.is_some_and(|lx| x <= lx) || !hull.add(x, lo, hi) {
                    break;
                }
                last_x = Some(x);
            }
            end += 1;
        }

        let line = hull.line();
        let mut seg = Segment::new(origin, line.slope, line.intercept + S::SHIFT);
        match enforce_floor_bounds(src, &mut seg, start, end) {
            Ok(()) => {
                segments.push(seg);
                starts.push(start);
                start = end;
            }
            Err(bad) if bad > start => {
                // Round-off pushed a point out of its band; keep the valid
                // prefix and restart at the offending point.
                segments.push(seg);
                starts.push(start);
                start = bad;
            }
            Err(_) => {
                segments.push(Segment::new(origin, 0.0, src.y(start) + S::SHIFT));
                starts.push(start);
                start += 1;
            }
        }
    }
    (segments, starts)
}

pub(crate) fn check_epsilon(epsilon: u32) -> Result<()> {
    if epsilon == 0 || epsilon > (i32::MAX as u32) {
        return Err(Error::EpsilonOutOfRange(epsilon as u64));
    }
    Ok(())
}

/// Builds the PLA-model with the fewest segments such that every key's
/// floored prediction is within `epsilon` of its first-occurrence rank.
///
/// One left-to-right pass; each point is pushed to and popped from the hull
/// chains at most once.
pub fn build_optimal_pla<K: Key>(keys: &[K], epsilon: u32) -> Result<PlaModel<K>> {
    check_epsilon(epsilon)?;
    validate_sorted(keys)?;
    let (segments, _) = stream_segments(&SortedKeys {
        keys,
        eps: epsilon as i64,
    });
    Ok(PlaModel::from_parts(segments, epsilon, keys.len()))
}

fn validate_points<K: Key>(points: &[Point<K>]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (i, p) in points.iter().enumerate() {
        if !p.x.is_valid() {
            return Err(Error::InvalidKey(i));
        }
        if !(p.y_range > 0.0 && p.y_range.is_finite()) {
            return Err(Error::EpsilonOutOfRange(p.y_range.max(0.0) as u64));
        }
        if i > 0 && (!(points[i - 1].x < p.x) || points[i - 1].y >= p.y) {
            return Err(Error::UnsortedInput(i));
        }
    }
    Ok(())
}

/// Segments for points with per-point bands plus their start indices.
/// When every band has the same integral half-height the exact uniform path
/// is taken, so the result coincides with [`build_optimal_pla`].
pub(crate) fn weighted_segments_with_starts<K: Key>(
    points: &[Point<K>],
) -> (Vec<Segment<K>>, Vec<usize>, u32) {
    let r0 = points[0].y_range;
    let uniform = r0 >= 1.0
        && r0.fract() == 0.0
        && r0 <= i32::MAX as f64
        && points.iter().all(|p| p.y_range == r0);
    if uniform {
        let (s, st) = stream_segments(&UniformPoints {
            points,
            eps: r0 as i64,
        });
        (s, st, r0 as u32)
    } else {
        let max_range = points.iter().map(|p| p.y_range).fold(0.0f64, f64::max);
        let (s, st) = stream_segments(&WeightedPoints { points });
        (s, st, max_range.ceil().max(1.0) as u32)
    }
}

/// Builds a minimum-size piecewise linear model whose line crosses the band
/// `[y - y_range, y + y_range]` of every point.
///
/// Points need strictly increasing `x` and `y`. With non-uniform bands the
/// floored prediction of a point is within `y_range + 1/2` of its `y`.
pub fn build_weighted_pla<K: Key>(points: &[Point<K>]) -> Result<PlaModel<K>> {
    validate_points(points)?;
    let (segments, _, eps) = weighted_segments_with_starts(points);
    let n = points.last().map(|p| p.y + 1).unwrap_or(0);
    Ok(PlaModel::from_parts(segments, eps, n))
}
