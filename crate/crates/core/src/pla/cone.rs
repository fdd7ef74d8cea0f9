//! Greedy cone-narrowing segmentation, kept as a baseline for the optimal
//! builder. Every segment is anchored at its first point; the cone of slopes
//! that keeps all later points within ε shrinks as points arrive, and a point
//! falling outside it starts a new segment.

use super::build::{check_epsilon, enforce_floor_bounds, BandSource, SortedKeys};
use super::{PlaModel, Segment};
use crate::key::{validate_sorted, Key};

pub fn build_shrinking_cone<K: Key>(keys: &[K], epsilon: u32) -> crate::Result<PlaModel<K>> {
    check_epsilon(epsilon)?;
    validate_sorted(keys)?;
    let src = SortedKeys {
        keys,
        eps: epsilon as i64,
    };
    let eps = epsilon as f64;
    let n = keys.len();
    let mut segments = Vec::new();
    let mut start = 0usize;

    while start < n {
        let origin = keys[start];
        let y0 = start as f64;
        let mut slo = 0.0f64;
        let mut shi = f64::INFINITY;
        let mut last_dx = 0.0f64;
        let mut end = start + 1;
        while end < n {
            let Some(k) = src.key(end) else {
                end += 1;
                continue;
            };
            let dx = k.offset_from(origin);
            if dx <= last_dx {
                break;
            }
            let dy = end as f64 - y0;
            let s = dy / dx;
            if s < slo || s > shi {
                break;
            }
            slo = slo.max((dy - eps) / dx);
            shi = shi.min((dy + eps) / dx);
            last_dx = dx;
            end += 1;
        }

        let slope = if shi.is_finite() { (slo + shi) / 2.0 } else { 0.0 };
        let mut seg = Segment::new(origin, slope, y0);
        match enforce_floor_bounds(&src, &mut seg, start, end) {
            Ok(()) => start = end,
            Err(bad) if bad > start => start = bad,
            Err(_) => {
                seg = Segment::new(origin, 0.0, y0);
                start += 1;
            }
        }
        segments.push(seg);
        // Skip the tail of a duplicate run that closed the segment.
        while start < n && src.key(start).is_none() {
            start += 1;
        }
    }
    Ok(PlaModel::from_parts(segments, epsilon, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pla::build_optimal_pla;

    #[test]
    fn linear_keys_need_one_segment() {
        let keys: Vec<u64> = (0..100).collect();
        assert_eq!(build_shrinking_cone(&keys, 1).unwrap().len(), 1);
    }

    #[test]
    fn valid_and_never_better_than_optimal() {
        let mut x = 1u64;
        let keys: Vec<u64> = (0..20_000u64)
            .map(|i| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                i * 100 + (x >> 58)
            })
            .collect();
        for eps in [1, 4, 16] {
            let cone = build_shrinking_cone(&keys, eps).unwrap();
            let opt = build_optimal_pla(&keys, eps).unwrap();
            assert!(cone.max_error(&keys) <= eps as u64);
            assert!(cone.len() >= opt.len());
        }
    }
}
