//! Analytic query-time and space models, and the machine calibration they
//! depend on.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Page size `B` in keys and latency `c` in seconds per level step.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CostModel {
    pub page_size: u64,
    pub latency_c: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            page_size: 8,
            latency_c: 100e-9,
        }
    }
}

impl CostModel {
    pub fn new(page_size: u64, latency_c: f64) -> Result<Self> {
        if page_size == 0 || !(latency_c > 0.0 && latency_c.is_finite()) {
            return Err(Error::InvalidRequest(format!(
                "need page_size >= 1 and latency_c > 0, got {page_size} and {latency_c}"
            )));
        }
        Ok(Self {
            page_size,
            latency_c,
        })
    }

    /// Parses `key=value` lines with keys `latency_c_ns` and
    /// `page_size_keys`. Blank lines and `#` comments are ignored; missing
    /// keys keep their defaults.
    pub fn parse_calibration(text: &str) -> Result<Self> {
        let mut model = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got {line:?}")))?;
            let v = v.trim();
            match k.trim() {
                "latency_c_ns" => {
                    model.latency_c = v
                        .parse::<f64>()
                        .map_err(|e| parse_err(e.to_string()))?
                        * 1e-9
                }
                "page_size_keys" => {
                    model.page_size = v.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?
                }
                other => return Err(parse_err(format!("unknown key {other:?}"))),
            }
        }
        Self::new(model.page_size, model.latency_c)
    }

    pub fn to_calibration(&self) -> String {
        let mut s = String::new();
        writeln!(s, "latency_c_ns={}", self.latency_c * 1e9).unwrap();
        writeln!(s, "page_size_keys={}", self.page_size).unwrap();
        s
    }
}

/// `c · log_{2ε}(m) · log₂(2ε/B)` seconds.
pub fn cost_time(epsilon: u64, m: u64, model: &CostModel) -> f64 {
    let two_eps = 2.0 * epsilon.max(1) as f64;
    if m <= 1 {
        return 0.0;
    }
    let levels = (m as f64).ln() / two_eps.ln();
    model.latency_c * levels * (two_eps / model.page_size as f64).log2()
}

/// Geometric-sum bound `(2εm - 1) / (2ε - 1)` on the total segment count.
pub fn cost_space(epsilon: u64, m: u64) -> f64 {
    let two_eps = 2.0 * epsilon.max(1) as f64;
    (two_eps * m as f64 - 1.0) / (two_eps - 1.0)
}

/// Times dependent binary searches over an array of `array_len` keys and
/// returns the mean cost of one halving step, in seconds.
pub fn calibrate_latency(array_len: usize, searches: usize, seed: u64) -> f64 {
    let n = array_len.max(2);
    let data: Vec<u64> = (0..n as u64).map(|i| i * 2 + 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries: Vec<u64> = (0..searches).map(|_| rng.random_range(0..2 * n as u64)).collect();
    let steps = (n as f64).log2().ceil();
    let start = Instant::now();
    let mut carry = 0u64;
    for &q in &queries {
        // The next query depends on the previous answer, so the searches
        // cannot overlap in the pipeline.
        let q = q ^ (carry & 1);
        carry = data.partition_point(|&x| x < q) as u64;
    }
    black_box(carry);
    start.elapsed().as_secs_f64() / (searches.max(1) as f64 * steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_time_examples() {
        let unit = CostModel {
            page_size: 16,
            latency_c: 1.0,
        };
        assert_eq!(cost_time(8, 1, &unit), 0.0);
        assert_eq!(cost_time(8, 1000, &unit), 0.0);
        let m = CostModel {
            page_size: 4,
            latency_c: 1.0,
        };
        let expect = (1000f64.ln() / 16f64.ln()) * 2.0;
        assert!((cost_time(8, 1000, &m) - expect).abs() < 1e-12);
    }

    #[test]
    fn cost_space_examples() {
        assert_eq!(cost_space(8, 1), 1.0);
        assert!((cost_space(4, 100) - 799.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_round_trip() {
        let m = CostModel::new(64, 87e-9).unwrap();
        let back = CostModel::parse_calibration(&m.to_calibration()).unwrap();
        assert_eq!(back.page_size, 64);
        assert!((back.latency_c - 87e-9).abs() < 1e-18);
        assert!(CostModel::parse_calibration("# note\n\nlatency_c_ns = 50\n").is_ok());
        assert!(matches!(
            CostModel::parse_calibration("latency_c_ns=abc"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(CostModel::parse_calibration("bogus=1").is_err());
        assert!(CostModel::parse_calibration("page_size_keys=0").is_err());
    }

    #[test]
    fn calibration_measures_something() {
        let c = calibrate_latency(1 << 16, 10_000, 1);
        assert!(c > 0.0 && c < 1e-5);
    }
}
