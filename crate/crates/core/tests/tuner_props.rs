use pgm_core::dataset::{gen_dataset, GenKind};
use pgm_core::tuner::{
    default_interval, fit_power_law, minimize_space, minimize_time, CostModel, ModelTimer, SearchPolicy,
    SpaceRequest, TimeRequest, R2_THRESHOLD,
};
use pgm_core::{Error, IndexConfig, PgmModel};

const GRID_STEP: f64 = 1.05;

fn space(keys: &[u64], eps: u64) -> u64 {
    PgmModel::build(keys, &IndexConfig::recursive(eps as u32)).unwrap().stats().bytes
}

/// Geometric grid over the default interval, ending exactly at its upper end.
fn grid(n: usize) -> Vec<u64> {
    let (lo, hi) = default_interval(n);
    let mut g = Vec::new();
    let mut e = lo as f64;
    while (e.round() as u64) < hi {
        let v = e.round() as u64;
        if g.last() != Some(&v) {
            g.push(v);
        }
        e *= GRID_STEP;
    }
    g.push(hi);
    g
}

fn datasets() -> Vec<(&'static str, Vec<u64>)> {
    vec![
        ("uniform", gen_dataset(GenKind::UniformGaps, 1_000_000, 1).unwrap().keys),
        ("lognormal", gen_dataset(GenKind::LognormalGaps, 1_000_000, 2).unwrap().keys),
        ("zipf", gen_dataset(GenKind::ZipfGaps, 500_000, 3).unwrap().keys),
        (
            "piecewise",
            gen_dataset(GenKind::PiecewiseLinear { segments: 2000, noise: 20.0 }, 500_000, 4)
                .unwrap()
                .keys,
        ),
    ]
}

#[test]
fn min_time_matches_grid_oracle() {
    for (name, keys) in datasets() {
        let g = grid(keys.len());
        for (s_max, tol) in [(65_536u64, 1024u64), (16_384, 256), (262_144, 4096)] {
            // Oracle first: smallest feasible grid point.
            let oracle = g.iter().copied().find(|&e| space(&keys, e) <= s_max);
            let res = minimize_time(&keys, &TimeRequest::new(s_max, tol));
            let Some(best) = oracle else {
                assert!(matches!(res, Err(Error::InfeasibleSpace { .. })), "{name}");
                continue;
            };
            let r = res.unwrap();
            assert!(r.achieved_space <= s_max, "{name}: {} > {s_max}", r.achieved_space);
            assert_eq!(space(&keys, r.epsilon_star), r.achieved_space);
            assert!(
                r.epsilon_star as f64 <= best as f64 * GRID_STEP,
                "{name} s_max={s_max}: eps {} vs grid optimum {best}",
                r.epsilon_star
            );
            for &(e, m) in &r.samples {
                let built = PgmModel::build(&keys, &IndexConfig::recursive(e as u32)).unwrap();
                assert_eq!(built.leaf().len() as u64, m);
            }
        }
    }
}

#[test]
fn min_time_trivial_cases() {
    let keys = gen_dataset(GenKind::UniformGaps, 100_000, 7).unwrap().keys;
    let lo_space = space(&keys, 8);
    let r = minimize_time(&keys, &TimeRequest::new(lo_space, 0)).unwrap();
    assert_eq!((r.epsilon_star, r.builds_performed), (8, 1));
    let hi_space = space(&keys, 50_000);
    assert_eq!(
        minimize_time(&keys, &TimeRequest::new(hi_space - 1, 0)),
        Err(Error::InfeasibleSpace { min_bytes: hi_space })
    );
}

#[test]
fn min_space_matches_analytic_inversion_and_grid() {
    let cost = CostModel {
        page_size: 8,
        latency_c: 100e-9,
    };
    let timer = ModelTimer::new(cost);
    let keys = gen_dataset(GenKind::LognormalGaps, 1_000_000, 5).unwrap().keys;
    let n = keys.len() as u64;
    let g = grid(keys.len());
    for t_max in [600e-9, 900e-9, 1.2e-6, 1.5e-6, 1.8e-6] {
        let analytic = timer.invert(n, t_max).unwrap().min(default_interval(keys.len()).1 as f64);
        let oracle = g.iter().copied().filter(|&e| timer.time(n, e) <= t_max).last().unwrap();
        let r = minimize_space(&keys, &SpaceRequest::new(t_max, 0.0, cost), &mut timer.clone()).unwrap();
        let eps = r.epsilon_star as f64;
        assert!(timer.time(n, r.epsilon_star) <= t_max);
        assert!(eps <= analytic + 1e-9, "t_max {t_max}: {eps} past {analytic}");
        assert!(
            eps * 1.01 + 1.0 >= analytic.floor(),
            "t_max {t_max}: {eps} more than one step below {analytic}"
        );
        assert!(eps * GRID_STEP >= oracle as f64, "t_max {t_max}: {eps} vs grid {oracle}");
    }
}

#[test]
fn min_space_trivial_cases() {
    let cost = CostModel::default();
    let keys = gen_dataset(GenKind::UniformGaps, 200_000, 8).unwrap().keys;
    let mut timer = ModelTimer::new(cost);
    let r = minimize_space(&keys, &SpaceRequest::new(1.0, 0.0, cost), &mut timer).unwrap();
    assert_eq!(r.epsilon_star, 100_000);
    let best = timer.time(keys.len() as u64, 8);
    assert_eq!(
        minimize_space(&keys, &SpaceRequest::new(best * 0.5, 0.0, cost), &mut timer),
        Err(Error::InfeasibleTime { best_seconds: best })
    );
}

#[test]
fn guided_search_saves_builds() {
    let mut well_fit = 0usize;
    let mut no_worse = 0usize;
    for (name, keys) in datasets() {
        for s_max in [8_192u64, 24_576, 65_536, 131_072, 400_000] {
            let mut req = TimeRequest::new(s_max, 0);
            let biased = match minimize_time(&keys, &req) {
                Ok(r) => r,
                Err(Error::InfeasibleSpace { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            req.policy = SearchPolicy::PlainBinary;
            let plain = minimize_time(&keys, &req).unwrap();
            let pts: Vec<(f64, f64)> = biased.samples.iter().map(|&(e, m)| (e as f64, m as f64)).collect();
            let Ok(fit) = fit_power_law(&pts) else {
                continue;
            };
            println!(
                "{name} s_max={s_max}: biased {} builds (eps {}), plain {} builds (eps {}), R2 {:.4}",
                biased.builds_performed, biased.epsilon_star, plain.builds_performed, plain.epsilon_star, fit.r_squared
            );
            if fit.r_squared >= R2_THRESHOLD {
                well_fit += 1;
                if biased.builds_performed <= plain.builds_performed {
                    no_worse += 1;
                }
            }
        }
    }
    assert!(well_fit >= 5);
    assert!(no_worse * 5 >= well_fit * 4, "{no_worse} of {well_fit}");
}
