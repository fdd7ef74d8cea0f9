//! Brute-force reference for the minimum segment count, and closed-form
//! bounds on it for distinct integer keys.

use crate::key::{validate_sorted, HullCoord, Key};
use crate::{Error, Result};

pub const DP_ORACLE_LIMIT: usize = 2000;

/// Slope bound `dy / dx` with `dx > 0`, compared by cross-multiplication.
#[derive(Clone, Copy)]
struct Frac<C> {
    dy: C,
    dx: C,
}

impl<C: HullCoord> Frac<C> {
    fn lt(self, o: Self) -> bool {
        self.dy * o.dx < o.dy * self.dx
    }
}

/// Exact minimum number of segments whose floored predictions are all
/// within `epsilon` of the first-occurrence rank.
///
/// A run of points can share one line iff some slope satisfies every pairwise
/// constraint `(y_q - y_p - 2ε) / (x_q - x_p) <= s <= (y_q - y_p + 2ε) / (x_q - x_p)`.
/// Feasibility is hereditary, so for each start the longest feasible run is
/// found by extension and a DP over split points takes the minimum.
pub fn dp_oracle_min_segments<K: Key>(keys: &[K], epsilon: u32) -> Result<usize> {
    dp_oracle_min_segments_with_limit(keys, epsilon, DP_ORACLE_LIMIT)
}

pub fn dp_oracle_min_segments_with_limit<K: Key>(
    keys: &[K],
    epsilon: u32,
    limit: usize,
) -> Result<usize> {
    if epsilon == 0 {
        return Err(Error::EpsilonOutOfRange(0));
    }
    validate_sorted(keys)?;
    if keys.len() > limit {
        return Err(Error::OracleSizeLimit {
            len: keys.len(),
            limit,
        });
    }

    // Distinct keys with their first-occurrence rank.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &k) in keys.iter().enumerate() {
        if i == 0 || keys[i - 1] != k {
            xs.push(k);
            ys.push(i as i64);
        }
    }
    let m = xs.len();
    let two_eps = 2 * epsilon as i64;

    // reach[i] = one past the last point of the longest feasible run from i.
    let mut reach = vec![0usize; m];
    for i in 0..m {
        let mut lower: Option<Frac<K::Coord>> = None;
        let mut upper: Option<Frac<K::Coord>> = None;
        let mut j = i + 1;
        'extend: while j < m {
            let mut lo_j = lower;
            let mut hi_j = upper;
            for p in i..j {
                let dx = xs[j].hull_offset(xs[p]);
                if !(dx > K::Coord::ZERO) {
                    break 'extend;
                }
                let dy = ys[j] - ys[p];
                let lo = Frac {
                    dy: K::Coord::from_i64(dy - two_eps),
                    dx,
                };
                let hi = Frac {
                    dy: K::Coord::from_i64(dy + two_eps),
                    dx,
                };
                if lo_j.is_none_or(|l| l.lt(lo)) {
                    lo_j = Some(lo);
                }
                if hi_j.is_none_or(|h| hi.lt(h)) {
                    hi_j = Some(hi);
                }
            }
            if hi_j.unwrap().lt(lo_j.unwrap()) {
                break;
            }
            lower = lo_j;
            upper = hi_j;
            j += 1;
        }
        reach[i] = j;
    }

    let mut dp = vec![usize::MAX; m + 1];
    dp[0] = 0;
    for i in 0..m {
        if dp[i] == usize::MAX {
            continue;
        }
        for end in i + 1..=reach[i] {
            dp[end] = dp[end].min(dp[i] + 1);
        }
    }
    Ok(dp[m])
}

/// Closed-form quantities for `n` distinct integer keys drawn from a universe
/// of size `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// Upper bound on the optimal segment count.
    pub max_segments: u64,
    /// Minimum length of a run fully covered by one strip.
    pub min_full_strip_length: u64,
    /// Expected number of points per strip.
    pub avg_points_per_strip: f64,
}

pub fn bound_helpers(n: u64, universe: u64, epsilon: u32) -> Result<Bounds> {
    if epsilon == 0 {
        return Err(Error::EpsilonOutOfRange(0));
    }
    if n == 0 || n > universe {
        return Err(Error::InvalidRequest(format!(
            "need 0 < n <= U, got n = {n}, U = {universe}"
        )));
    }
    let eps = epsilon as u128;
    let min_full_strip_length = 8 * epsilon as u64 + 1;
    if n == universe {
        return Ok(Bounds {
            max_segments: 1,
            min_full_strip_length,
            avg_points_per_strip: f64::INFINITY,
        });
    }
    // ⌈n / (1 + 2ε/(1 - n/U))⌉ = ⌈n (U - n) / ((U - n) + 2εU)⌉
    let (n128, u128_) = (n as u128, universe as u128);
    let gap = u128_ - n128;
    let num = n128 * gap;
    let den = gap + 2 * eps * u128_;
    let max_segments = num.div_ceil(den).max(1) as u64;
    let avg_points_per_strip = 1.0 + 2.0 * epsilon as f64 * universe as f64 / gap as f64;
    Ok(Bounds {
        max_segments,
        min_full_strip_length,
        avg_points_per_strip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        let keys: Vec<u64> = (0..100).collect();
        assert_eq!(dp_oracle_min_segments(&keys, 1).unwrap(), 1);
        let big = vec![0u64; 2001];
        assert_eq!(
            dp_oracle_min_segments(&big, 1),
            Err(Error::OracleSizeLimit {
                len: 2001,
                limit: 2000
            })
        );
    }

    #[test]
    fn oracle_on_two_clusters() {
        // Four collinear points, a jump of ~1000, four more: two runs.
        let keys = [0u64, 1, 2, 3, 1000, 1001, 1002, 1003];
        assert_eq!(dp_oracle_min_segments(&keys, 1).unwrap(), 2);
    }

    #[test]
    fn bounds_examples() {
        let b = bound_helpers(100, 100, 8).unwrap();
        assert_eq!(b.max_segments, 1);
        assert_eq!(b.min_full_strip_length, 65);

        let b = bound_helpers(1000, 1_000_000, 8).unwrap();
        let alpha: f64 = 1000.0 / 1e6;
        let expect = (1000.0f64 / (1.0 + 16.0 / (1.0 - alpha))).ceil() as u64;
        assert_eq!(b.max_segments, expect);
        assert!((b.avg_points_per_strip - (1.0 + 16.0 * 1e6 / 999_000.0)).abs() < 1e-9);
    }
}
