//! Choosing ε under a space or a time budget.
//!
//! [`minimize_time`] looks for the smallest ε whose serialized index fits in
//! `s_max` bytes: a few plain bisection steps collect `(ε, m)` samples, a
//! power law `m ≈ a·ε^(-b)` is fitted to them, and while the fit is good the
//! next probe is pulled from the midpoint toward the ε the fit predicts.
//! [`minimize_space`] looks for the largest ε whose mean query time stays
//! within `t_max`, by exponential search from the ε the cost model suggests
//! followed by bisection.

mod cost;
mod powerlaw;
mod timers;

pub use cost::{calibrate_latency, cost_space, cost_time, CostModel};
pub use powerlaw::{fit_power_law, PowerLawFit};
pub use timers::{ModelTimer, QueryTimer, WallClockTimer};

use std::collections::BTreeMap;

use crate::index::{IndexConfig, PgmIndex, PgmModel, DEFAULT_EPS_INTERNAL};
use crate::key::Key;
use crate::{Error, Result};

/// Minimum R² for the power law to steer the search.
pub const R2_THRESHOLD: f64 = 0.95;
/// Bisection steps taken before the first fit.
pub const INITIAL_BINARY_ITERATIONS: usize = 4;
/// Stop refining once the bracket ratio falls below this.
pub const SPACE_REFINE_RATIO: f64 = 1.01;

/// Default search interval `[8, n/2]`.
pub fn default_interval(n: usize) -> (u64, u64) {
    let hi = (n as u64 / 2).max(8);
    (8, hi)
}

/// Interval `[B/2, n/2]` for an explicitly configured page size.
pub fn page_interval(n: usize, page_size: u64) -> (u64, u64) {
    let lo = (page_size / 2).max(1);
    (lo, (n as u64 / 2).max(lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchPolicy {
    /// Bisection steered by the fitted power law.
    #[default]
    Biased,
    /// Bisection only, for comparison.
    PlainBinary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRequest {
    pub s_max: u64,
    pub tol: u64,
    pub interval: Option<(u64, u64)>,
    pub policy: SearchPolicy,
    /// Only used to report the modelled query time of the answer.
    pub cost: CostModel,
}

impl TimeRequest {
    pub fn new(s_max: u64, tol: u64) -> Self {
        Self {
            s_max,
            tol,
            interval: None,
            policy: SearchPolicy::Biased,
            cost: CostModel::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceRequest {
    pub t_max: f64,
    pub tol: f64,
    pub interval: Option<(u64, u64)>,
    /// Sets the starting point of the exponential search.
    pub cost: CostModel,
}

impl SpaceRequest {
    pub fn new(t_max: f64, tol: f64, cost: CostModel) -> Self {
        Self {
            t_max,
            tol,
            interval: None,
            cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub epsilon: u64,
    pub space_bytes: u64,
    pub mean_time_s: Option<f64>,
    pub action: &'static str,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TunerResult {
    pub epsilon_star: u64,
    pub achieved_space: u64,
    pub achieved_time: f64,
    pub iterations: usize,
    pub builds_performed: usize,
    /// `(ε, leaf segment count)` of every build.
    pub samples: Vec<(u64, u64)>,
    pub fit: Option<PowerLawFit>,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    bytes: u64,
    leaf_segments: u64,
    total_segments: u64,
    levels: u64,
}

/// Builds indexes at requested ε, remembering results and checking that
/// the leaf segment count never grows with ε.
struct Prober<'a, K> {
    keys: &'a [K],
    seen: BTreeMap<u64, Probe>,
    builds: usize,
    samples: Vec<(u64, u64)>,
    trace: Vec<TraceRow>,
}

impl<'a, K: Key> Prober<'a, K> {
    fn new(keys: &'a [K]) -> Self {
        Self {
            keys,
            seen: BTreeMap::new(),
            builds: 0,
            samples: Vec::new(),
            trace: Vec::new(),
        }
    }

    fn config(eps: u64) -> IndexConfig {
        IndexConfig {
            eps_last: eps.min(u32::MAX as u64) as u32,
            eps_internal: DEFAULT_EPS_INTERNAL,
            router: crate::index::Router::Recursive,
        }
    }

    fn record(&mut self, eps: u64, model: &PgmModel<K>) -> Result<Probe> {
        let st = model.stats();
        let probe = Probe {
            bytes: st.bytes,
            leaf_segments: *st.segments_per_level.last().unwrap() as u64,
            total_segments: st.total_segments as u64,
            levels: st.levels as u64,
        };
        self.builds += 1;
        self.samples.push((eps, probe.leaf_segments));
        for (&e, p) in &self.seen {
            let (lo, hi) = if e < eps { ((e, p), (eps, &probe)) } else { ((eps, &probe), (e, p)) };
            if lo.0 != hi.0 && lo.1.leaf_segments < hi.1.leaf_segments {
                return Err(Error::NonMonotone {
                    eps_a: lo.0,
                    s_a: lo.1.leaf_segments as usize,
                    eps_b: hi.0,
                    s_b: hi.1.leaf_segments as usize,
                });
            }
        }
        self.seen.insert(eps, probe);
        Ok(probe)
    }

    fn space(&mut self, eps: u64) -> Result<Probe> {
        if let Some(p) = self.seen.get(&eps) {
            return Ok(*p);
        }
        let model = PgmModel::build(self.keys, &Self::config(eps))?;
        self.record(eps, &model)
    }

    fn index(&mut self, eps: u64) -> Result<(PgmIndex<K>, Probe)> {
        let idx = PgmIndex::build(self.keys.to_vec(), &Self::config(eps))?;
        let probe = match self.seen.get(&eps) {
            Some(p) => *p,
            None => self.record(eps, idx.model())?,
        };
        Ok((idx, probe))
    }

    fn fit(&self) -> Option<PowerLawFit> {
        let pts: Vec<(f64, f64)> = self
            .seen
            .iter()
            .map(|(&e, p)| (e as f64, p.leaf_segments as f64))
            .collect();
        fit_power_law(&pts).ok()
    }

    fn log(&mut self, epsilon: u64, space_bytes: u64, mean_time_s: Option<f64>, action: &'static str) {
        self.trace.push(TraceRow {
            iteration: self.trace.len(),
            epsilon,
            space_bytes,
            mean_time_s,
            action,
        });
    }
}

fn check_interval(interval: (u64, u64)) -> Result<(u64, u64)> {
    let (lo, hi) = interval;
    if lo == 0 || lo > hi || hi > u32::MAX as u64 {
        return Err(Error::InvalidRequest(format!(
            "invalid epsilon interval [{lo}, {hi}]"
        )));
    }
    Ok((lo, hi))
}

/// ε at which the fitted byte model `h + K·ε^(-b)` meets `s_max`, found by
/// Newton's method on `u = ln ε` and clamped to `[lo, hi]`.
fn newton_guess(fit: &PowerLawFit, probe: &Probe, s_max: u64, lo: u64, hi: u64) -> Option<f64> {
    let overhead = (crate::index::HEADER_BYTES as u64 + 8 * probe.levels) as f64;
    let ratio = probe.total_segments as f64 / probe.leaf_segments.max(1) as f64;
    let k = crate::index::SEGMENT_BYTES as f64 * ratio * fit.a;
    let target = s_max as f64;
    let (ulo, uhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut u = (ulo + uhi) / 2.0;
    for _ in 0..64 {
        let pw = k * (-fit.b * u).exp();
        let f = overhead + pw - target;
        let df = -fit.b * pw;
        if df == 0.0 || !df.is_finite() {
            return None;
        }
        let next = (u - f / df).clamp(ulo, uhi);
        if (next - u).abs() < 1e-12 {
            u = next;
            break;
        }
        u = next;
    }
    u.is_finite().then(|| u.exp())
}

/// Smallest ε in the interval whose serialized recursive index takes at
/// most `s_max` bytes. Stops early once the space is within `tol` of the
/// budget.
pub fn minimize_time<K: Key>(keys: &[K], req: &TimeRequest) -> Result<TunerResult> {
    crate::key::validate_sorted(keys)?;
    let (mut lo, mut hi) = check_interval(req.interval.unwrap_or(default_interval(keys.len())))?;
    let mut p = Prober::new(keys);

    let first = p.space(lo)?;
    p.log(lo, first.bytes, None, "lower-end");
    if first.bytes <= req.s_max {
        return Ok(finish_time(p, lo, first, 0, req));
    }
    let last = p.space(hi)?;
    p.log(hi, last.bytes, None, "upper-end");
    if last.bytes > req.s_max {
        return Err(Error::InfeasibleSpace {
            min_bytes: last.bytes,
        });
    }

    // Invariant: lo is infeasible, hi is feasible.
    let span = (hi - lo + 1) as f64;
    let threshold = (2.0 * span.log2().max(2.0).log2().ceil()).max(1.0);
    let mut guesses = 0usize;
    let mut iterations = 0usize;
    let mut best = last;
    let mut fit = None;
    while hi - lo > 1 && req.s_max - best.bytes > req.tol {
        let mid = lo + (hi - lo) / 2;
        let mut next = mid;
        let mut action = "bisect";
        if req.policy == SearchPolicy::Biased
            && iterations >= INITIAL_BINARY_ITERATIONS
            && (guesses as f64) < threshold
        {
            fit = p.fit();
            if let Some(f) = fit.filter(|f| f.r_squared >= R2_THRESHOLD) {
                if let Some(g) = newton_guess(&f, &best, req.s_max, lo, hi) {
                    let rho = guesses as f64 / threshold;
                    let blended = rho * mid as f64 + (1.0 - rho) * g;
                    next = (blended.round() as u64).clamp(lo + 1, hi - 1);
                    guesses += 1;
                    action = "guess";
                }
            }
        }
        let probe = p.space(next)?;
        iterations += 1;
        p.log(next, probe.bytes, None, action);
        if probe.bytes <= req.s_max {
            hi = next;
            best = probe;
        } else {
            lo = next;
        }
    }
    let mut res = finish_time(p, hi, best, iterations, req);
    res.fit = res.fit.or(fit);
    Ok(res)
}

fn finish_time<K: Key>(
    p: Prober<'_, K>,
    eps: u64,
    probe: Probe,
    iterations: usize,
    req: &TimeRequest,
) -> TunerResult {
    let fit = p.fit();
    TunerResult {
        epsilon_star: eps,
        achieved_space: probe.bytes,
        achieved_time: cost_time(eps, probe.leaf_segments, &req.cost),
        iterations,
        builds_performed: p.builds,
        samples: p.samples,
        fit,
        trace: p.trace,
    }
}

/// Largest ε in the interval whose mean query time, as reported by `timer`,
/// is at most `t_max + tol`.
pub fn minimize_space<K: Key, T: QueryTimer<K>>(
    keys: &[K],
    req: &SpaceRequest,
    timer: &mut T,
) -> Result<TunerResult> {
    crate::key::validate_sorted(keys)?;
    if !(req.t_max > 0.0) || !(req.tol >= 0.0) {
        return Err(Error::InvalidRequest("t_max must be positive and tol non-negative".into()));
    }
    let (lo, hi) = check_interval(req.interval.unwrap_or(default_interval(keys.len())))?;
    let mut p = Prober::new(keys);
    let mut times: BTreeMap<u64, f64> = BTreeMap::new();
    let limit = req.t_max + req.tol;
    let mut iterations = 0usize;

    let mut measure = |p: &mut Prober<'_, K>, eps: u64, action: &'static str| -> Result<bool> {
        if let Some(&t) = times.get(&eps) {
            return Ok(t <= limit);
        }
        let (idx, probe) = p.index(eps)?;
        let t = timer.mean_query_seconds(&idx);
        times.insert(eps, t);
        p.log(eps, probe.bytes, Some(t), action);
        Ok(t <= limit)
    };

    let b = req.cost.page_size as f64;
    let start = (b / 2.0) * (req.t_max / req.cost.latency_c).exp2();
    let start = if start.is_finite() { start.round() as u64 } else { hi };
    let start = start.clamp(lo, hi);

    // Bracket [good, bad) with good feasible and bad infeasible (or past hi).
    let (mut good, mut bad);
    if measure(&mut p, start, "start")? {
        good = start;
        loop {
            if good == hi {
                bad = hi + 1;
                break;
            }
            let next = good.saturating_mul(2).min(hi);
            iterations += 1;
            if measure(&mut p, next, "grow")? {
                good = next;
            } else {
                bad = next;
                break;
            }
        }
    } else {
        bad = start;
        loop {
            if bad == lo {
                let best = times[&lo];
                return Err(Error::InfeasibleTime { best_seconds: best });
            }
            let next = (bad / 2).max(lo);
            iterations += 1;
            if measure(&mut p, next, "shrink")? {
                good = next;
                break;
            }
            bad = next;
        }
    }

    while bad - good > 1 && (bad as f64) / (good as f64) > SPACE_REFINE_RATIO {
        let mid = good + (bad - good) / 2;
        iterations += 1;
        if measure(&mut p, mid, "refine")? {
            good = mid;
        } else {
            bad = mid;
        }
    }

    let probe = p.space(good)?;
    let achieved_time = times[&good];
    let fit = p.fit();
    Ok(TunerResult {
        epsilon_star: good,
        achieved_space: probe.bytes,
        achieved_time,
        iterations,
        builds_performed: p.builds,
        samples: p.samples,
        fit,
        trace: p.trace,
    })
}
