//! Boundary searches over monotone predicates.
//!
//! Every function here looks for the first index `b` in `[0, n]` at which a
//! predicate that is `true` on a prefix and `false` afterwards turns false.

/// Binary search restricted to the window `[lo, hi]`, widened by galloping
/// when the boundary turns out to lie outside it.
pub(crate) fn boundary_near(n: usize, lo: usize, hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    if n == 0 {
        return 0;
    }
    let hi = hi.min(n - 1);
    let lo = lo.min(hi);
    if lo > 0 && !pred(lo - 1) {
        return gallop_left(lo - 1, &pred, &mut 0);
    }
    if hi + 1 < n && pred(hi + 1) {
        return gallop_right(n, hi + 1, &pred, &mut 0);
    }
    lo + partition(hi + 1 - lo, |i| pred(lo + i), &mut 0)
}

/// Exponential search outward from `hint`. Returns the boundary and the
/// number of predicate evaluations it took.
pub(crate) fn boundary_exponential(n: usize, hint: usize, pred: impl Fn(usize) -> bool) -> (usize, u64) {
    if n == 0 {
        return (0, 0);
    }
    let hint = hint.min(n - 1);
    let mut steps = 1;
    let b = if pred(hint) {
        gallop_right(n, hint, &pred, &mut steps)
    } else {
        gallop_left(hint, &pred, &mut steps)
    };
    (b, steps)
}

/// `pred(from)` is true: the boundary is in `(from, n]`.
fn gallop_right(n: usize, from: usize, pred: &impl Fn(usize) -> bool, steps: &mut u64) -> usize {
    let mut known_true = from;
    let mut step = 1usize;
    loop {
        let probe = from.saturating_add(step);
        if probe >= n {
            let base = known_true + 1;
            return base + partition(n - base, |i| pred(base + i), steps);
        }
        *steps += 1;
        if !pred(probe) {
            let base = known_true + 1;
            return base + partition(probe - base, |i| pred(base + i), steps);
        }
        known_true = probe;
        step *= 2;
    }
}

/// `pred(from)` is false: the boundary is in `[0, from]`.
fn gallop_left(from: usize, pred: &impl Fn(usize) -> bool, steps: &mut u64) -> usize {
    let mut known_false = from;
    let mut step = 1usize;
    loop {
        if step > from {
            return partition(known_false, pred, steps);
        }
        let probe = from - step;
        *steps += 1;
        if pred(probe) {
            let base = probe + 1;
            return base + partition(known_false - base, |i| pred(base + i), steps);
        }
        known_false = probe;
        step *= 2;
    }
}

/// First index in `[0, len)` where `pred` is false, or `len`.
fn partition(len: usize, pred: impl Fn(usize) -> bool, steps: &mut u64) -> usize {
    let (mut lo, mut hi) = (0usize, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *steps += 1;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_window_and_hint_finds_the_boundary() {
        let data = [1u32, 1, 3, 3, 3, 5, 8, 8, 9, 12];
        let n = data.len();
        for q in 0..14 {
            let expect = data.partition_point(|&x| x < q);
            for lo in 0..n {
                for hi in lo..n {
                    assert_eq!(boundary_near(n, lo, hi, |i| data[i] < q), expect);
                }
                assert_eq!(boundary_exponential(n, lo, |i| data[i] < q).0, expect);
            }
        }
        assert_eq!(boundary_near(0, 0, 0, |_| true), 0);
    }

    #[test]
    fn exact_hint_costs_two_probes() {
        let data: Vec<u32> = (0..1000).collect();
        let (b, steps) = boundary_exponential(1000, 500, |i| data[i] < 500);
        assert_eq!(b, 500);
        assert_eq!(steps, 2);
    }
}
