//! Model family members and their fitting procedures.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A member of the model family, ordered by complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Linear,
    Quadratic,
    Cubic,
    /// One hidden layer of four tanh units.
    Perceptron,
}

const HIDDEN: usize = 4;
const MLP_STEPS: usize = 1500;
const MLP_SAMPLES: usize = 512;
const MLP_LEARNING_RATE: f64 = 0.02;

impl ModelKind {
    /// Number of stored parameters, the unit of space accounting.
    pub fn param_count(self) -> usize {
        match self {
            ModelKind::Linear => 2,
            ModelKind::Quadratic => 3,
            ModelKind::Cubic => 4,
            ModelKind::Perceptron => 3 * HIDDEN + 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Quadratic => "quadratic",
            ModelKind::Cubic => "cubic",
            ModelKind::Perceptron => "perceptron",
        }
    }

    fn degree(self) -> Option<usize> {
        match self {
            ModelKind::Linear => Some(1),
            ModelKind::Quadratic => Some(2),
            ModelKind::Cubic => Some(3),
            ModelKind::Perceptron => None,
        }
    }
}

/// A fitted function of the normalized abscissa `t` in `[0, 1]`.
///
/// Polynomials store their coefficients in increasing degree. The perceptron
/// stores input weights, hidden biases, output weights and the output bias,
/// followed by the affine map from its output to ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub kind: ModelKind,
    pub params: Vec<f64>,
}

impl Fitted {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            ModelKind::Perceptron => {
                let p = &self.params;
                let mut out = p[3 * HIDDEN];
                for h in 0..HIDDEN {
                    out += p[2 * HIDDEN + h] * (p[h] * t + p[HIDDEN + h]).tanh();
                }
                p[3 * HIDDEN + 1] + p[3 * HIDDEN + 2] * out
            }
            _ => self.params.iter().rev().fold(0.0, |acc, &c| acc * t + c),
        }
    }
}

/// Fits `kind` to the points `(t[i], y[i])`. The returned function is shifted
/// up by one half so that flooring it rounds the fit.
pub(crate) fn fit(kind: ModelKind, t: &[f64], y: &[f64], seed: u64) -> Fitted {
    debug_assert_eq!(t.len(), y.len());
    let y0 = y[0];
    let mut fitted = match kind.degree() {
        Some(d) => fit_polynomial(kind, d, t, y, y0),
        None => fit_perceptron(t, y, y0, seed),
    };
    match kind {
        ModelKind::Perceptron => fitted.params[3 * HIDDEN + 1] += 0.5,
        _ => fitted.params[0] += 0.5,
    }
    fitted
}

fn fit_polynomial(kind: ModelKind, degree: usize, t: &[f64], y: &[f64], y0: f64) -> Fitted {
    let n = t.len();
    let mut params = vec![0.0; degree + 1];
    if n == 1 {
        params[0] = y0;
        return Fitted { kind, params };
    }
    let d = degree.min(n - 1);
    let phi = DMatrix::from_fn(n, d + 1, |i, j| t[i].powi(j as i32));
    let rhs = DVector::from_iterator(n, y.iter().map(|v| v - y0));
    let coef = phi
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .expect("singular vectors were computed");
    for (j, c) in coef.iter().enumerate() {
        params[j] = *c;
    }
    params[0] += y0;
    Fitted { kind, params }
}

/// Full-batch Adam on squared error from a seeded start. Layout of `w`:
/// input weights, hidden biases, output weights, output bias.
fn fit_perceptron(t: &[f64], y: &[f64], y0: f64, seed: u64) -> Fitted {
    const P: usize = 3 * HIDDEN + 1;
    let n = t.len();
    let span = (y[n - 1] - y0).max(1.0);
    let stride = n.div_ceil(MLP_SAMPLES).max(1);
    let samples: Vec<(f64, f64)> = (0..n)
        .step_by(stride)
        .chain(std::iter::once(n - 1))
        .map(|i| (t[i], (y[i] - y0) / span))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = [0.0f64; P];
    for h in 0..HIDDEN {
        w[h] = rng.random_range(-4.0..4.0);
        w[HIDDEN + h] = rng.random_range(-2.0..2.0);
        w[2 * HIDDEN + h] = rng.random_range(-0.5..0.5);
    }
    w[3 * HIDDEN] = 0.5;

    let (b1, b2) = (0.9f64, 0.999f64);
    let mut m1 = [0.0f64; P];
    let mut m2 = [0.0f64; P];
    let scale = 2.0 / samples.len() as f64;
    for step in 1..=MLP_STEPS {
        let mut g = [0.0f64; P];
        for &(x, target) in &samples {
            let mut hidden = [0.0; HIDDEN];
            let mut out = w[3 * HIDDEN];
            for h in 0..HIDDEN {
                hidden[h] = (w[h] * x + w[HIDDEN + h]).tanh();
                out += w[2 * HIDDEN + h] * hidden[h];
            }
            let d = scale * (out - target);
            g[3 * HIDDEN] += d;
            for h in 0..HIDDEN {
                g[2 * HIDDEN + h] += d * hidden[h];
                let back = d * w[2 * HIDDEN + h] * (1.0 - hidden[h] * hidden[h]);
                g[h] += back * x;
                g[HIDDEN + h] += back;
            }
        }
        let c1 = 1.0 - b1.powi(step as i32);
        let c2 = 1.0 - b2.powi(step as i32);
        for i in 0..P {
            m1[i] = b1 * m1[i] + (1.0 - b1) * g[i];
            m2[i] = b2 * m2[i] + (1.0 - b2) * g[i] * g[i];
            w[i] -= MLP_LEARNING_RATE * (m1[i] / c1) / ((m2[i] / c2).sqrt() + 1e-12);
        }
    }

    let mut params = w.to_vec();
    params.push(y0);
    params.push(span);
    Fitted {
        kind: ModelKind::Perceptron,
        params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_recover_exact_data() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        for (kind, f) in [
            (ModelKind::Linear, (|x: f64| 3.0 + 40.0 * x) as fn(f64) -> f64),
            (ModelKind::Quadratic, |x| 1.0 + 10.0 * x + 30.0 * x * x),
            (ModelKind::Cubic, |x| 2.0 - x + 5.0 * x * x + 50.0 * x * x * x),
        ] {
            let y: Vec<f64> = t.iter().map(|&x| f(x)).collect();
            let m = fit(kind, &t, &y, 0);
            for (&x, &v) in t.iter().zip(&y) {
                assert!((m.eval(x) - 0.5 - v).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn perceptron_tracks_a_curve_deterministically() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
        let y: Vec<f64> = t.iter().map(|&x| 200.0 * x.sqrt()).collect();
        let a = fit(ModelKind::Perceptron, &t, &y, 9);
        let b = fit(ModelKind::Perceptron, &t, &y, 9);
        assert_eq!(a, b);
        assert_eq!(a.kind.param_count(), 13);
        let worst = t
            .iter()
            .zip(&y)
            .map(|(&x, &v)| (a.eval(x) - v).abs())
            .fold(0.0, f64::max);
        assert!(worst < 25.0, "{worst}");
    }
}
