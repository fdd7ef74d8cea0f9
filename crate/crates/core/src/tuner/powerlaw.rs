//! Least-squares fit of `s = a * ε^(-b)`.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn predict(&self, eps: f64) -> f64 {
        self.a * eps.powf(-self.b)
    }
}

const MAX_ITERATIONS: usize = 100;

/// Levenberg–Marquardt on the raw residuals, started from the closed-form
/// regression of `ln s` on `ln ε`. Needs two distinct `ε` and positive `s`.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    let distinct = samples
        .iter()
        .any(|&(e, _)| e != samples.first().map(|s| s.0).unwrap_or(e));
    if samples.len() < 2 || !distinct {
        return Err(Error::InsufficientSamples);
    }
    if samples
        .iter()
        .any(|&(e, s)| !(e > 0.0 && s > 0.0 && e.is_finite() && s.is_finite()))
    {
        return Err(Error::InvalidRequest(
            "power-law samples must be positive and finite".into(),
        ));
    }

    // ln s = ln a - b ln ε
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(e, s) in samples {
        let (x, y) = (e.ln(), s.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let (mut a, mut b) = (intercept.exp(), -slope);

    let sse = |a: f64, b: f64| -> f64 {
        samples
            .iter()
            .map(|&(e, s)| (a * e.powf(-b) - s).powi(2))
            .sum()
    };
    let mut cost = sse(a, b);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        // Normal equations of the linearized problem.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(e, s) in samples {
            let p = e.powf(-b);
            let r = a * p - s;
            let da = p;
            let db = -a * p * e.ln();
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        for _ in 0..30 {
            let (m11, m22) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
            let det = m11 * m22 - jab * jab;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(m22 * ga - jab * gb) / det;
            let step_b = -(m11 * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            let nc = sse(na, nb);
            if na > 0.0 && nc.is_finite() && nc <= cost {
                let done = cost - nc <= 1e-15 * cost.max(1e-300);
                a = na;
                b = nb;
                cost = nc;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }

    let mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let ss_tot: f64 = samples.iter().map(|&(_, s)| (s - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - cost / ss_tot).clamp(0.0, 1.0)
    } else if cost <= 1e-18 * mean * mean {
        1.0
    } else {
        0.0
    };
    Ok(PowerLawFit { a, b, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_samples_are_recovered() {
        let samples: Vec<(f64, f64)> = [8.0, 16.0, 40.0, 100.0, 700.0]
            .iter()
            .map(|&e| (e, 100.0 / e))
            .collect();
        let f = fit_power_law(&samples).unwrap();
        assert!((f.a - 100.0).abs() < 1e-6 * 100.0);
        assert!((f.b - 1.0).abs() < 1e-6);
        assert!((f.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_samples_give_flat_law() {
        let samples: Vec<(f64, f64)> = [8.0, 32.0, 128.0].iter().map(|&e| (e, 7.0)).collect();
        let f = fit_power_law(&samples).unwrap();
        assert!(f.b.abs() < 1e-9);
        assert!((f.predict(1000.0) - 7.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_samples_are_rejected() {
        assert_eq!(
            fit_power_law(&[(4.0, 1.0), (4.0, 2.0)]),
            Err(Error::InsufficientSamples)
        );
        assert_eq!(fit_power_law(&[(4.0, 1.0)]), Err(Error::InsufficientSamples));
    }

    #[test]
    fn noisy_samples_still_fit_well() {
        let samples: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let e = 8.0 * 1.4f64.powi(i);
                let wiggle = 1.0 + 0.03 * ((i * 7 % 5) as f64 - 2.0);
                (e, 5e6 * e.powf(-1.16) * wiggle)
            })
            .collect();
        let f = fit_power_law(&samples).unwrap();
        assert!((f.b - 1.16).abs() < 0.1, "{f:?}");
        assert!(f.r_squared > 0.99);
        let sse = |a: f64, b: f64| -> f64 {
            samples.iter().map(|&(e, s)| (s - a * e.powf(-b)).powi(2)).sum()
        };
        assert!(sse(f.a, f.b) <= sse(5e6, 1.16));
    }
}
