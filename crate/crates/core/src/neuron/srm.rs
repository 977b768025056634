//! Spike response model: membrane potential as PSP-kernel-filtered input
//! spikes plus a reset kernel over the neuron's own spikes, with logistic
//! escape noise.

use serde::{Deserialize, Serialize};

use crate::encoding::SpikePattern;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SrmKernels {
    pub eps_tau_m: f64,
    pub eps_tau_s: f64,
    pub kappa_tau: f64,
    /// Reset kernel amplitude (negative).
    pub kappa_amplitude: f64,
    /// Steepness of the escape-noise logistic.
    pub beta: f64,
    /// Firing threshold subtracted from the membrane inside ρ.
    pub threshold: f64,
}

impl Default for SrmKernels {
    fn default() -> Self {
        Self {
            eps_tau_m: 10.0,
            eps_tau_s: 2.5,
            kappa_tau: 10.0,
            kappa_amplitude: -5.0,
            beta: 1.0,
            threshold: 4.0,
        }
    }
}

impl SrmKernels {
    /// Peak normalisation of the double-exponential PSP.
    pub fn eps_norm(&self) -> f64 {
        let (tm, ts) = (self.eps_tau_m, self.eps_tau_s);
        let t_peak = (tm / ts).ln() * tm * ts / (tm - ts);
        1.0 / ((-t_peak / tm).exp() - (-t_peak / ts).exp())
    }

    /// PSP kernel at integer lag; zero at and before lag 0.
    pub fn eps(&self, lag: i64) -> f64 {
        if lag <= 0 {
            return 0.0;
        }
        let s = lag as f64;
        self.eps_norm() * ((-s / self.eps_tau_m).exp() - (-s / self.eps_tau_s).exp())
    }

    /// Reset kernel at integer lag; zero at and before lag 0.
    pub fn kappa(&self, lag: i64) -> f64 {
        if lag <= 0 {
            return 0.0;
        }
        self.kappa_amplitude * (-(lag as f64) / self.kappa_tau).exp()
    }

    pub fn rho(&self, u: f64) -> f64 {
        spike_probability(u - self.threshold, self.beta)
    }
}

/// Logistic firing probability `1 / (1 + e^{-βu})`, stable for large `|βu|`.
pub fn spike_probability(u: f64, beta: f64) -> f64 {
    let x = beta * u;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Recursive double-exponential PSP filter, one trace per neuron.
#[derive(Debug, Clone)]
pub struct PspFilter {
    decay_m: f64,
    decay_s: f64,
    norm: f64,
    a_m: Vec<f64>,
    a_s: Vec<f64>,
}

impl PspFilter {
    pub fn new(n: usize, k: &SrmKernels) -> Self {
        Self {
            decay_m: (-1.0 / k.eps_tau_m).exp(),
            decay_s: (-1.0 / k.eps_tau_s).exp(),
            norm: k.eps_norm(),
            a_m: vec![0.0; n],
            a_s: vec![0.0; n],
        }
    }

    /// Advances to the next step given the spikes of the current one; call
    /// [`PspFilter::value`] for the PSP at the next step.
    #[inline]
    pub fn push(&mut self, spikes: impl Iterator<Item = usize>) {
        for i in spikes {
            self.a_m[i] += 1.0;
            self.a_s[i] += 1.0;
        }
        for v in &mut self.a_m {
            *v *= self.decay_m;
        }
        for v in &mut self.a_s {
            *v *= self.decay_s;
        }
    }

    /// Like [`PspFilter::push`] with graded (expected) spike amounts.
    pub fn push_values(&mut self, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self.a_m[i] = (self.a_m[i] + v) * self.decay_m;
            self.a_s[i] = (self.a_s[i] + v) * self.decay_s;
        }
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.norm * (self.a_m[i] - self.a_s[i])
    }

    pub fn values_into(&self, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.value(i);
        }
    }
}

/// PSP traces `(Y_n ∗ ε)(t)` for every input neuron, step-major
/// (`n_steps × n_neurons`).
pub fn psp_traces(input: &SpikePattern, k: &SrmKernels) -> Vec<f64> {
    let (n, t_len) = input.shape();
    let active = input.active_by_step();
    let mut f = PspFilter::new(n, k);
    let mut out = vec![0.0; n * t_len];
    for t in 0..t_len {
        f.values_into(&mut out[t * n..(t + 1) * n]);
        f.push(active[t].iter().copied());
    }
    out
}

/// Reset contribution `(Z ∗ κ)(t)` of a single spike train.
pub fn reset_trace(own: &[u8], k: &SrmKernels) -> Vec<f64> {
    let decay = (-1.0 / k.kappa_tau).exp();
    let mut r = 0.0;
    own.iter()
        .map(|&z| {
            let v = k.kappa_amplitude * r;
            r = (r + z as f64) * decay;
            v
        })
        .collect()
}

/// Membrane potential `u_j(t) = Σ_n w_jn (Y_n ∗ ε)(t) + (Z_j ∗ κ)(t)` as a
/// `neurons × steps` matrix, for given input spikes and own spike history.
pub fn srm_membrane(w: &Matrix, input: &SpikePattern, own: &SpikePattern, k: &SrmKernels) -> Result<Matrix> {
    if w.cols() != input.n_neurons() || w.rows() != own.n_neurons() || input.n_steps() != own.n_steps() {
        return Err(Error::Shape(format!(
            "weights {}x{}, input {:?}, own {:?}",
            w.rows(),
            w.cols(),
            input.shape(),
            own.shape()
        )));
    }
    let (n_in, t_len) = input.shape();
    let psp = psp_traces(input, k);
    let mut u = Matrix::zeros(w.rows(), t_len);
    for j in 0..w.rows() {
        let reset = reset_trace(own.neuron(j), k);
        let row = w.row(j);
        for t in 0..t_len {
            let x = &psp[t * n_in..(t + 1) * n_in];
            let drive: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            u.set(j, t, drive + reset[t]);
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // O(T^2) convolution straight from the kernel definitions.
    fn brute_membrane(w: &Matrix, input: &SpikePattern, own: &SpikePattern, k: &SrmKernels) -> Matrix {
        let t_len = input.n_steps();
        Matrix::from_fn(w.rows(), t_len, |j, t| {
            let mut u = 0.0;
            for n in 0..input.n_neurons() {
                for s in 0..t_len {
                    if input.get(n, s) {
                        u += w.get(j, n) * k.eps(t as i64 - s as i64);
                    }
                }
            }
            for s in 0..t_len {
                if own.get(j, s) {
                    u += k.kappa(t as i64 - s as i64);
                }
            }
            u
        })
    }

    fn pattern(n: usize, t: usize) -> impl Strategy<Value = SpikePattern> {
        proptest::collection::vec(prop::bool::weighted(0.2), n * t)
            .prop_map(move |b| SpikePattern::from_bits(n, t, b.into_iter().map(u8::from).collect()).unwrap())
    }

    #[test]
    fn kernel_shapes() {
        let k = SrmKernels::default();
        assert_eq!(k.eps(0), 0.0);
        let peak = (1..50).map(|s| k.eps(s)).fold(0.0, f64::max);
        assert!(peak <= 1.0 && peak > 0.98, "{peak}");
        assert!((1..200).all(|s| k.eps(s) >= 0.0 && k.kappa(s) <= 0.0));
        assert_eq!(k.kappa(0), 0.0);
    }

    #[test]
    fn empty_input_gives_zero_membrane() {
        let w = Matrix::from_fn(2, 3, |_, _| 0.7);
        let u = srm_membrane(&w, &SpikePattern::zeros(3, 20), &SpikePattern::zeros(2, 20), &SrmKernels::default()).unwrap();
        assert!(u.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_spike_single_weight() {
        let k = SrmKernels::default();
        let w = Matrix::from_vec(1, 1, vec![0.3]);
        let input = SpikePattern::from_times(1, 30, &[vec![5]]);
        let u = srm_membrane(&w, &input, &SpikePattern::zeros(1, 30), &k).unwrap();
        for t in 0..30 {
            assert!((u.get(0, t) - 0.3 * k.eps(t as i64 - 5)).abs() < 1e-12);
        }
    }

    #[test]
    fn probability_edges() {
        assert_eq!(spike_probability(0.0, 1.0), 0.5);
        assert_eq!(spike_probability(1e6, 1.0), 1.0);
        assert_eq!(spike_probability(-1e6, 1.0), 0.0);
        assert!(spike_probability(800.0, 1.0).is_finite());
        for u in [-3.0, -0.2, 0.0, 1.7] {
            assert_eq!(spike_probability(u, 2.5), spike_probability(2.5 * u, 1.0));
        }
        assert!((softplus(1000.0) - 1000.0).abs() < 1e-9);
        assert!(softplus(-1000.0) >= 0.0);
    }

    proptest! {
        #[test]
        fn recursive_filters_match_direct_convolution(input in pattern(4, 40), own in pattern(2, 40), ws in proptest::collection::vec(-2.0f64..2.0, 8)) {
            let k = SrmKernels::default();
            let w = Matrix::from_vec(2, 4, ws);
            let fast = srm_membrane(&w, &input, &own, &k).unwrap();
            let slow = brute_membrane(&w, &input, &own, &k);
            for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
                prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            }
        }

        #[test]
        fn membrane_is_linear_in_weights(input in pattern(4, 30), own in pattern(2, 30), ws in proptest::collection::vec(-1.0f64..1.0, 8), alpha in -3.0f64..3.0) {
            let k = SrmKernels::default();
            let w = Matrix::from_vec(2, 4, ws);
            let none = SpikePattern::zeros(2, 30);
            let zero_w = Matrix::zeros(2, 4);
            let reset = srm_membrane(&zero_w, &input, &own, &k).unwrap();
            let drive = srm_membrane(&w, &input, &none, &k).unwrap();
            let scaled = srm_membrane(&w.map(|v| alpha * v), &input, &own, &k).unwrap();
            for i in 0..scaled.as_slice().len() {
                let expect = alpha * drive.as_slice()[i] + reset.as_slice()[i];
                prop_assert!((scaled.as_slice()[i] - expect).abs() < 1e-10);
            }
        }

        #[test]
        fn probability_is_monotone(u1 in -50.0f64..50.0, du in 0.0f64..10.0, b1 in 0.1f64..5.0, db in 0.0f64..5.0) {
            prop_assert!(spike_probability(u1 + du, b1) >= spike_probability(u1, b1));
            if u1 > 0.0 {
                prop_assert!(spike_probability(u1, b1 + db) >= spike_probability(u1, b1));
            }
        }
    }
}
