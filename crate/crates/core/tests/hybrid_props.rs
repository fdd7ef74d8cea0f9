use pgm_core::hybrid::{
    merge, top_down_regression, top_down_split, BreakpointStrategy, ModelFamily,
};
use pgm_core::pla::{build_optimal_pla, dp_oracle_min_segments};
use proptest::prelude::*;

fn strategies() -> [BreakpointStrategy; 4] {
    [
        BreakpointStrategy::Midpoint,
        BreakpointStrategy::Random { seed: 5 },
        BreakpointStrategy::Argmax,
        BreakpointStrategy::LongestChain,
    ]
}

fn keys_strategy() -> impl Strategy<Value = Vec<u64>> {
    (prop::collection::vec((1u64..64, 1u64..30), 1..12), 0u64..4).prop_map(|(runs, dup)| {
        // Runs of roughly constant gap, occasionally repeating a key.
        let mut k = 0u64;
        let mut out = Vec::new();
        for (i, (gap, len)) in runs.into_iter().enumerate() {
            for j in 0..len * 20 {
                k += gap + (j * (i as u64 + 3)) % 5;
                out.push(k);
                if dup > 0 && j % 17 == dup {
                    out.push(k);
                }
            }
        }
        out
    })
}

/// Exhaustive validity check against first-occurrence ranks.
fn max_error(model: &pgm_core::hybrid::PnaModel<u64>, keys: &[u64]) -> u64 {
    keys.iter()
        .map(|&k| {
            let rank = keys.partition_point(|&x| x < k) as i64;
            (model.predict(k) - rank).unsigned_abs()
        })
        .max()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_strategy_is_eps_valid(keys in keys_strategy(), eps in prop::sample::select(vec![1u32, 2, 8])) {
        let fam = ModelFamily::default();
        for s in strategies() {
            let split = top_down_split(&keys, eps, &fam, s).unwrap();
            let merged = merge(split.clone(), &keys, &fam).unwrap();
            prop_assert!(max_error(&split, &keys) <= eps as u64);
            prop_assert!(max_error(&merged, &keys) <= eps as u64);
            prop_assert!(merged.len() <= split.len());
            prop_assert!(merged.pieces().windows(2).all(|w| w[0].first_key < w[1].first_key));
        }
    }

    #[test]
    fn linear_family_never_beats_optimal(keys in keys_strategy(), eps in prop::sample::select(vec![1u32, 4])) {
        let opt = build_optimal_pla(&keys, eps).unwrap().len();
        for s in strategies() {
            let m = top_down_regression(&keys, eps, &ModelFamily::linear_only(), s).unwrap();
            prop_assert!(m.len() >= opt);
        }
    }

    #[test]
    fn builds_are_deterministic(keys in keys_strategy()) {
        let fam = ModelFamily::default();
        for s in strategies() {
            let a = top_down_regression(&keys, 2, &fam, s).unwrap();
            let b = top_down_regression(&keys, 2, &fam, s).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn two_ramps_with_a_jump() {
    let mut keys: Vec<u64> = (0..300).map(|i| 2 * i).collect();
    keys.extend((0..300).map(|i| 100_000 + 7 * i));
    let dp = dp_oracle_min_segments(&keys, 1).unwrap();
    assert_eq!(dp, 2);
    for s in strategies() {
        let m = top_down_regression(&keys, 1, &ModelFamily::default(), s).unwrap();
        assert!(max_error(&m, &keys) <= 1);
        assert!(m.len() <= dp + 1, "{} pieces with {:?}", m.len(), s);
    }
}

#[test]
fn perceptron_member_stays_valid() {
    let keys: Vec<u64> = (0..3000u64).map(|i| (i as f64).powf(1.6) as u64 + i).collect();
    let fam = ModelFamily::default().with_perceptron();
    let m = top_down_regression(&keys, 8, &fam, BreakpointStrategy::LongestChain).unwrap();
    assert!(max_error(&m, &keys) <= 8);
}
