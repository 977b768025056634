//! Multinomial logistic regression over one-hot features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Recorded for provenance; full-batch descent from zero weights does not
    /// consume randomness.
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            learning_rate: 0.5,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    /// classes × features
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub l2: f64,
}

impl LogRegModel {
    pub fn zeros(n_classes: usize, dim: usize, l2: f64) -> Self {
        Self {
            weights: Matrix::zeros(n_classes, dim),
            bias: vec![0.0; n_classes],
            l2,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.n_classes()];
        self.weights.matvec_into(x, &mut z);
        for (v, b) in z.iter_mut().zip(&self.bias) {
            *v += b;
        }
        z
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    /// Argmax of the logits; ties to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    /// Mean cross-entropy plus `l2/2 · ‖W‖²`.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
        let ce: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, &y)| {
                let z = self.logits(x);
                log_sum_exp(&z) - z[y]
            })
            .sum::<f64>()
            / xs.len() as f64;
        ce + 0.5 * self.l2 * self.weights.as_slice().iter().map(|w| w * w).sum::<f64>()
    }

    /// Gradient of [`LogRegModel::loss`]: (weights, bias).
    pub fn gradient(&self, xs: &[Vec<f64>], ys: &[usize]) -> (Matrix, Vec<f64>) {
        let nz: Vec<Vec<usize>> = xs.iter().map(|x| nonzeros(x)).collect();
        self.gradient_sparse(xs, &nz, ys)
    }

    fn gradient_sparse(&self, xs: &[Vec<f64>], nz: &[Vec<usize>], ys: &[usize]) -> (Matrix, Vec<f64>) {
        let m = self.n_classes();
        let mut gw = Matrix::zeros(m, self.weights.cols());
        let mut gb = vec![0.0; m];
        let inv = 1.0 / xs.len() as f64;
        let mut z = vec![0.0; m];
        for ((x, idx), &y) in xs.iter().zip(nz).zip(ys) {
            for (c, zc) in z.iter_mut().enumerate() {
                let row = self.weights.row(c);
                *zc = self.bias[c] + idx.iter().map(|&i| row[i] * x[i]).sum::<f64>();
            }
            let p = softmax(&z);
            for c in 0..m {
                let d = (p[c] - (c == y) as u8 as f64) * inv;
                gb[c] += d;
                let row = gw.row_mut(c);
                for &i in idx {
                    row[i] += d * x[i];
                }
            }
        }
        for (g, w) in gw.as_mut_slice().iter_mut().zip(self.weights.as_slice()) {
            *g += self.l2 * w;
        }
        (gw, gb)
    }
}

fn nonzeros(x: &[f64]) -> Vec<usize> {
    x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate() {
        if v > z[best] {
            best = i;
        }
    }
    best
}

/// Full-batch gradient descent from zero weights. Returns the model and the
/// loss before every step.
pub fn logreg_train(xs: &[Vec<f64>], ys: &[usize], n_classes: usize, cfg: &LogRegConfig) -> Result<(LogRegModel, Vec<f64>)> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} samples, {} labels", xs.len(), ys.len())));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(Error::Shape("feature vectors differ in length".into()));
    }
    if let Some(&y) = ys.iter().find(|&&y| y >= n_classes) {
        return Err(Error::Shape(format!("label {y} out of range for {n_classes} classes")));
    }
    let nz: Vec<Vec<usize>> = xs.iter().map(|x| nonzeros(x)).collect();
    let mut model = LogRegModel::zeros(n_classes, dim, cfg.l2);
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (gw, gb) = model.gradient_sparse(xs, &nz, ys);
        curve.push(model.loss(xs, ys));
        for (w, g) in model.weights.as_mut_slice().iter_mut().zip(gw.as_slice()) {
            *w -= cfg.learning_rate * g;
        }
        for (b, g) in model.bias.iter_mut().zip(&gb) {
            *b -= cfg.learning_rate * g;
        }
        if !model.weights.is_finite() || !curve[epoch].is_finite() {
            return Err(Error::Diverged {
                epoch,
                reason: "learning rate too high for logistic regression".into(),
            });
        }
    }
    Ok((model, curve))
}

pub fn logreg_predict(model: &LogRegModel, x: &[f64]) -> Result<usize> {
    if x.len() != model.weights.cols() {
        return Err(Error::Shape(format!("{} features, model expects {}", x.len(), model.weights.cols())));
    }
    Ok(model.predict(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<usize>) {
        let xs = vec![
            vec![1.0, 0.0, 0.3, -0.5, 2.0],
            vec![0.0, 1.0, -1.2, 0.4, 0.1],
            vec![0.5, 0.5, 0.0, 1.0, -1.0],
            vec![-0.7, 0.2, 0.9, 0.0, 0.3],
            vec![1.5, -0.4, 0.2, 0.8, 0.0],
            vec![0.1, 0.1, 0.1, -0.1, 0.6],
        ];
        (xs, vec![0, 1, 2, 1, 0, 2])
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (xs, ys) = toy();
        let mut m = LogRegModel::zeros(3, 5, 0.05);
        for (i, w) in m.weights.as_mut_slice().iter_mut().enumerate() {
            *w = ((i * 7 % 11) as f64 - 5.0) / 7.0;
        }
        m.bias = vec![0.2, -0.1, 0.05];
        let (gw, gb) = m.gradient(&xs, &ys);
        let h = 1e-5;
        let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        for k in 0..15 {
            let mut p = m.clone();
            p.weights.as_mut_slice()[k] += h;
            let mut q = m.clone();
            q.weights.as_mut_slice()[k] -= h;
            let num = (p.loss(&xs, &ys) - q.loss(&xs, &ys)) / (2.0 * h);
            assert!(rel(gw.as_slice()[k], num) < 1e-6, "w{k}: {} vs {num}", gw.as_slice()[k]);
        }
        for c in 0..3 {
            let mut p = m.clone();
            p.bias[c] += h;
            let mut q = m.clone();
            q.bias[c] -= h;
            let num = (p.loss(&xs, &ys) - q.loss(&xs, &ys)) / (2.0 * h);
            assert!(rel(gb[c], num) < 1e-6);
        }
    }

    #[test]
    fn separable_toy_set_is_fit() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| if i % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect();
        let ys: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let (m, curve) = logreg_train(&xs, &ys, 2, &LogRegConfig::default()).unwrap();
        assert!(xs.iter().zip(&ys).all(|(x, &y)| m.predict(x) == y));
        assert!(curve.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_model_predicts_class_zero() {
        assert_eq!(logreg_predict(&LogRegModel::zeros(3, 4, 0.0), &[1.0, 0.0, 0.0, 1.0]).unwrap(), 0);
        assert!(logreg_predict(&LogRegModel::zeros(3, 4, 0.0), &[1.0]).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let (xs, ys) = toy();
        let cfg = LogRegConfig {
            learning_rate: 1e300,
            ..Default::default()
        };
        assert!(matches!(logreg_train(&xs, &ys, 3, &cfg), Err(Error::Diverged { .. })));
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(z in proptest::collection::vec(-50.0f64..50.0, 1..8)) {
            let s: f64 = softmax(&z).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
        }

        #[test]
        fn prediction_shift_and_scale_invariant(ws in proptest::collection::vec(-2.0f64..2.0, 12), x in proptest::collection::vec(-1.0f64..1.0, 4), shift in -10.0f64..10.0, scale in 0.1f64..10.0) {
            let m = LogRegModel { weights: Matrix::from_vec(3, 4, ws), bias: vec![0.1, -0.2, 0.3], l2: 0.0 };
            let mut shifted = m.clone();
            for b in &mut shifted.bias { *b += shift; }
            prop_assert_eq!(m.predict(&x), shifted.predict(&x));
            let scaled = LogRegModel { weights: m.weights.map(|w| w * scale), bias: m.bias.iter().map(|b| b * scale).collect(), l2: 0.0 };
            prop_assert_eq!(m.predict(&x), scaled.predict(&x));
        }
    }
}
