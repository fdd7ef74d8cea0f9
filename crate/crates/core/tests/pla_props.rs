use pgm_core::pla::{
    bound_helpers, build_optimal_pla, build_shrinking_cone, build_weighted_pla,
    dp_oracle_min_segments, Point,
};
use proptest::prelude::*;

fn sorted_keys(max_len: usize, max_gap: u64) -> impl Strategy<Value = Vec<u64>> {
    (any::<u64>(), prop::collection::vec(0..=max_gap, 1..max_len)).prop_map(|(start, gaps)| {
        let mut k = start % (1 << 40);
        gaps.into_iter()
            .map(|g| {
                k += g;
                k
            })
            .collect()
    })
}

fn eps() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![1u32, 2, 4, 8])
}

/// Rank of the first occurrence of every entry, by binary search.
fn first_ranks(keys: &[u64]) -> Vec<usize> {
    keys.iter().map(|k| keys.partition_point(|x| x < k)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn optimal_count_matches_oracle(keys in sorted_keys(600, 40), e in eps()) {
        let m = build_optimal_pla(&keys, e).unwrap();
        prop_assert_eq!(m.len(), dp_oracle_min_segments(&keys, e).unwrap());
    }

    #[test]
    fn every_build_is_eps_valid(keys in sorted_keys(2000, 1000), e in eps()) {
        let ranks = first_ranks(&keys);
        for m in [build_optimal_pla(&keys, e).unwrap(), build_shrinking_cone(&keys, e).unwrap()] {
            for (i, &k) in keys.iter().enumerate() {
                let seg = m.segments()[m.segment_for(k)];
                let err = (seg.predict(k) - ranks[i] as i64).abs();
                prop_assert!(err <= e as i64);
            }
            prop_assert_eq!(m.segments()[0].first_key, keys[0]);
            prop_assert!(m.segments().windows(2).all(|w| w[0].first_key < w[1].first_key));
            prop_assert!(m.segments().iter().all(|s| s.slope >= 0.0 && s.intercept.is_finite()));
        }
    }

    #[test]
    fn optimal_dominates_cone(keys in sorted_keys(3000, 5000), e in eps()) {
        let opt = build_optimal_pla(&keys, e).unwrap();
        let cone = build_shrinking_cone(&keys, e).unwrap();
        prop_assert!(opt.len() <= cone.len());
    }

    #[test]
    fn strictly_increasing_keys_obey_count_bound(keys in sorted_keys(3000, 5000), e in eps()) {
        let mut keys = keys;
        keys.dedup();
        let m = build_optimal_pla(&keys, e).unwrap();
        let n = keys.len();
        prop_assert!(m.len() <= n.div_ceil(2 * e as usize).max(1));
        let universe = keys[n - 1] - keys[0] + 1;
        let b = bound_helpers(n as u64, universe, e).unwrap();
        prop_assert!(b.max_segments >= 1);
    }

    #[test]
    fn count_is_monotone_in_eps(keys in sorted_keys(3000, 3000)) {
        let counts: Vec<usize> = [1u32, 2, 4, 8, 16, 32]
            .iter()
            .map(|&e| build_optimal_pla(&keys, e).unwrap().len())
            .collect();
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn builds_are_deterministic(keys in sorted_keys(2000, 100), e in eps()) {
        let a = build_optimal_pla(&keys, e).unwrap();
        let b = build_optimal_pla(&keys, e).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.segments().iter().zip(b.segments()) {
            prop_assert_eq!(x.first_key, y.first_key);
            prop_assert_eq!(x.slope.to_bits(), y.slope.to_bits());
            prop_assert_eq!(x.intercept.to_bits(), y.intercept.to_bits());
        }
    }

    #[test]
    fn weighted_segments_stab_every_band(
        raw in prop::collection::vec((1u64..500, 0.3f64..20.0), 1..1500)
    ) {
        let mut x = 0u64;
        let points: Vec<Point<u64>> = raw
            .iter()
            .enumerate()
            .map(|(i, &(gap, r))| {
                x += gap;
                Point { x, y: i, y_range: r }
            })
            .collect();
        let m = build_weighted_pla(&points).unwrap();
        for p in &points {
            let seg = m.segments()[m.segment_for(p.x)];
            // Stored lines round the band-stabbing line, so half a unit of slack.
            let err = (seg.predict(p.x) as f64 - p.y as f64).abs();
            prop_assert!(err <= p.y_range + 0.5, "err {} range {}", err, p.y_range);
        }
    }
}

#[test]
fn float_keys_match_oracle() {
    let keys: Vec<f64> = (0..1500).map(|i| ((i as f64) * 0.37).sin() * 3.0 + i as f64 * 0.8).collect();
    let mut keys = keys;
    keys.sort_by(f64::total_cmp);
    for e in [1u32, 2, 4, 8] {
        let m = build_optimal_pla(&keys, e).unwrap();
        assert_eq!(m.len(), dp_oracle_min_segments(&keys, e).unwrap());
        assert!(m.max_error(&keys) <= e as u64);
    }
}
