//! Spiking neural unit: a discrete-time recurrent cell whose state leaks,
//! integrates weighted input and is zeroed by the unit's own previous spike.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// State nonlinearity `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateActivation {
    Identity,
    /// `max(0, ·)`
    Relu,
}

impl StateActivation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Relu => x.max(0.0),
        }
    }

    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Relu => (x > 0.0) as u8 as f64,
        }
    }
}

/// Output nonlinearity `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    /// 1 when the argument is ≥ 0.
    Step,
    /// `1 / (1 + e^{-k x})`
    Sigmoid { steepness: f64 },
}

impl OutputActivation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Step => (x >= 0.0) as u8 as f64,
            Self::Sigmoid { steepness } => crate::neuron::spike_probability(x, steepness),
        }
    }
}

/// One layer of SNUs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnuLayer {
    /// post × pre
    pub weights: Matrix,
    /// Leak `l(τ)` in [0, 1).
    pub leak: f64,
    /// Per-neuron bias (negative threshold).
    pub bias: Vec<f64>,
}

impl SnuLayer {
    pub fn n_out(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_in(&self) -> usize {
        self.weights.cols()
    }
}

/// `s_t = g(W x_t + l ⊙ s_{t-1} ⊙ (1 − y_{t-1}))`, `y_t = h(s_t + b)`.
pub fn snu_step(
    layer: &SnuLayer,
    g: StateActivation,
    h: OutputActivation,
    x: &[f64],
    s_prev: &[f64],
    y_prev: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut wx = vec![0.0; layer.n_out()];
    layer.weights.matvec_into(x, &mut wx);
    snu_update(layer, g, h, &wx, s_prev, y_prev)
}

/// Same as [`snu_step`] with the synaptic drive `W x_t` supplied by the
/// caller (sparse input, crossbar read-out).
pub fn snu_update(
    layer: &SnuLayer,
    g: StateActivation,
    h: OutputActivation,
    drive: &[f64],
    s_prev: &[f64],
    y_prev: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = layer.n_out();
    let mut s = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let st = g.apply(drive[i] + layer.leak * s_prev[i] * (1.0 - y_prev[i]));
        s.push(st);
        y.push(h.apply(st + layer.bias[i]));
    }
    (s, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(leak: f64, bias: f64) -> SnuLayer {
        SnuLayer {
            weights: Matrix::from_vec(1, 1, vec![1.0]),
            leak,
            bias: vec![bias],
        }
    }

    fn run(layer: &SnuLayer, xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut s, mut y) = (vec![0.0], vec![0.0]);
        let mut ss = Vec::new();
        let mut ys = Vec::new();
        for &x in xs {
            (s, y) = snu_step(layer, StateActivation::Relu, OutputActivation::Step, &[x], &s, &y);
            ss.push(s[0]);
            ys.push(y[0]);
        }
        (ss, ys)
    }

    #[test]
    fn sub_threshold_impulse_decays() {
        let (s, y) = run(&single(0.8, -1.0), &[0.9, 0.0, 0.0, 0.0, 0.0]);
        let expect = [0.9, 0.72, 0.576, 0.4608, 0.36864];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn supra_threshold_impulse_spikes_then_resets() {
        let (s, y) = run(&single(0.8, -1.0), &[1.2, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(&s[1..], &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn full_reset_drops_carryover() {
        let layer = SnuLayer {
            weights: Matrix::from_vec(2, 2, vec![0.5, -0.2, 0.1, 0.3]),
            leak: 0.9,
            bias: vec![-1.0, -1.0],
        };
        let x = [1.0, 1.0];
        let (s, _) = snu_step(&layer, StateActivation::Relu, OutputActivation::Step, &x, &[7.0, 3.0], &[1.0, 1.0]);
        let (s0, _) = snu_step(&layer, StateActivation::Relu, OutputActivation::Step, &x, &[0.0, 0.0], &[0.0, 0.0]);
        assert_eq!(s, s0);
    }

    #[test]
    fn quiescent_without_weights() {
        let layer = SnuLayer {
            weights: Matrix::zeros(3, 2),
            leak: 0.8,
            bias: vec![-0.5; 3],
        };
        let (mut s, mut y) = (vec![0.0; 3], vec![0.0; 3]);
        for t in 0..50 {
            (s, y) = snu_step(&layer, StateActivation::Relu, OutputActivation::Step, &[t as f64, 1.0], &s, &y);
            assert!(y.iter().all(|&v| v == 0.0));
        }
    }
}
