//! Probabilistic backpropagation for SRM networks with escape noise: the
//! output layer ascends the exact log-likelihood of the target trains;
//! hidden layers use sampled spikes and the PSP-filtered backpropagated
//! error as eligibility.

use rand::Rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::{init_uniform, EpochLog};
use crate::dataset::KeyValueRecord;
use crate::encoding::{CteCodebook, SpikePattern, TargetPatternSet};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::neuron::{softplus, PspFilter, SrmKernels};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrmNetwork {
    /// post × pre, input to output.
    pub layers: Vec<Matrix>,
    pub kernels: SrmKernels,
}

/// How a layer turns membrane potentials into spikes.
enum Firing<'a, R: Rng> {
    /// Spike iff ρ ≥ 0.5.
    Threshold,
    /// Emit the firing probability itself (mean-field pass).
    Expected,
    Sample(&'a mut R),
    /// Use the given train (teacher forcing) as the layer's own output.
    Forced(&'a SpikePattern),
}

/// Membrane potentials, emitted spikes and PSP traces of one layer, all
/// step-major (`T × n`).
struct LayerRun {
    u: Vec<f64>,
    /// 0/1, or probabilities for [`Firing::Expected`]
    out: Vec<f64>,
    psp: Vec<f64>,
}

impl LayerRun {
    fn spikes(&self, n: usize) -> SpikePattern {
        let t_len = self.out.len() / n.max(1);
        let mut p = SpikePattern::zeros(n, t_len);
        for t in 0..t_len {
            for j in 0..n {
                if self.out[t * n + j] == 1.0 {
                    p.set(j, t, true);
                }
            }
        }
        p
    }
}

impl SrmNetwork {
    pub fn init(sizes: &[usize], cfg: &TrainConfig) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Config("an SRM network needs at least one layer".into()));
        }
        Ok(Self {
            layers: sizes
                .windows(2)
                .enumerate()
                .map(|(l, w)| init_uniform(w[1], w[0], cfg.seed, l as u64))
                .collect(),
            kernels: cfg.srm.kernels,
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().map_or(0, Matrix::rows)
    }

    fn run_layer<R: Rng>(&self, l: usize, psp_in: &[f64], t_len: usize, mut firing: Firing<'_, R>) -> LayerRun {
        let w = &self.layers[l];
        let (n, n_in) = (w.rows(), w.cols());
        let k = &self.kernels;
        let kappa_decay = (-1.0 / k.kappa_tau).exp();
        let mut reset = vec![0.0; n];
        let mut u = vec![0.0; n * t_len];
        let mut out = vec![0.0; n * t_len];
        let mut filt = PspFilter::new(n, k);
        let mut psp = vec![0.0; n * t_len];
        for t in 0..t_len {
            let x = &psp_in[t * n_in..(t + 1) * n_in];
            let ut = &mut u[t * n..(t + 1) * n];
            w.matvec_into(x, ut);
            let zt = &mut out[t * n..(t + 1) * n];
            for j in 0..n {
                ut[j] += k.kappa_amplitude * reset[j];
                zt[j] = match &mut firing {
                    Firing::Threshold => (ut[j] >= k.threshold) as u8 as f64,
                    Firing::Expected => k.rho(ut[j]),
                    Firing::Sample(rng) => (rng.random::<f64>() < k.rho(ut[j])) as u8 as f64,
                    Firing::Forced(p) => p.get(j, t) as u8 as f64,
                };
                reset[j] = (reset[j] + zt[j]) * kappa_decay;
            }
            filt.values_into(&mut psp[t * n..(t + 1) * n]);
            filt.push_values(zt);
        }
        LayerRun { u, out, psp }
    }

    /// Deterministic inference: hidden layers pass their expected spike
    /// trains forward and the output layer spikes where ρ ≥ 0.5. With `rng`,
    /// every layer samples instead.
    pub fn infer<R: Rng>(&self, input: &SpikePattern, mut rng: Option<&mut R>) -> SpikePattern {
        let t_len = input.n_steps();
        let top = self.layers.len() - 1;
        let mut psp = crate::neuron::psp_traces(input, &self.kernels);
        for l in 0..top {
            let firing = match rng.as_deref_mut() {
                Some(r) => Firing::Sample(r),
                None => Firing::Expected,
            };
            psp = self.run_layer(l, &psp, t_len, firing).psp;
        }
        let firing = match rng {
            Some(r) => Firing::Sample(r),
            None => Firing::Threshold,
        };
        self.run_layer(top, &psp, t_len, firing).spikes(self.n_outputs())
    }

    /// Mean-field pass through every layer; returns the output firing
    /// probabilities, step-major.
    pub fn expected_output(&self, input: &SpikePattern) -> Vec<f64> {
        let t_len = input.n_steps();
        let mut psp = crate::neuron::psp_traces(input, &self.kernels);
        let mut out = Vec::new();
        for l in 0..self.layers.len() {
            let run = self.run_layer::<rand_chacha::ChaCha8Rng>(l, &psp, t_len, Firing::Expected);
            psp = run.psp;
            out = run.out;
        }
        out
    }

    /// Log-likelihood of `target` at the output layer given the PSP traces of
    /// the layer below, with the target as the output's own spike history.
    /// Also returns the per-step error `β(z − ρ)` (step-major).
    pub fn output_log_likelihood(&self, psp_below: &[f64], target: &SpikePattern) -> (f64, Vec<f64>) {
        let l = self.layers.len() - 1;
        let t_len = target.n_steps();
        let n = self.layers[l].rows();
        let run = self.run_layer::<rand_chacha::ChaCha8Rng>(l, psp_below, t_len, Firing::Forced(target));
        let k = &self.kernels;
        let mut ll = 0.0;
        let mut delta = vec![0.0; n * t_len];
        for t in 0..t_len {
            for o in 0..n {
                let x = k.beta * (run.u[t * n + o] - k.threshold);
                let z = target.get(o, t) as u8 as f64;
                ll += z * x - softplus(x);
                delta[t * n + o] = k.beta * (z - k.rho(run.u[t * n + o]));
            }
        }
        (ll, delta)
    }

    /// Exact gradient of [`SrmNetwork::output_log_likelihood`] with respect to
    /// the output weights.
    pub fn output_gradient(&self, psp_below: &[f64], target: &SpikePattern) -> (f64, Matrix) {
        let (ll, delta) = self.output_log_likelihood(psp_below, target);
        let w = self.layers.last().unwrap();
        let (n, n_in) = (w.rows(), w.cols());
        let mut g = Matrix::zeros(n, n_in);
        accumulate_outer(&mut g, &delta, psp_below, target.n_steps());
        (ll, g)
    }

    /// Log-likelihood of one sample and its (approximate, for hidden layers)
    /// gradient, added into `grads`.
    fn sample_gradient<R: Rng>(&self, input: &SpikePattern, target: &SpikePattern, rng: &mut R, grads: &mut [Matrix]) -> f64 {
        let t_len = input.n_steps();
        let k = &self.kernels;
        let mut psps = vec![crate::neuron::psp_traces(input, k)];
        let mut hidden_spikes = Vec::new();
        for l in 0..self.layers.len() - 1 {
            let run = self.run_layer(l, &psps[l], t_len, Firing::Sample(&mut *rng));
            hidden_spikes.push(run.spikes(self.layers[l].rows()));
            psps.push(run.psp);
        }
        let top = self.layers.len() - 1;
        let (ll, mut delta) = self.output_log_likelihood(&psps[top], target);
        accumulate_outer(&mut grads[top], &delta, &psps[top], t_len);

        let dm = (-1.0 / k.eps_tau_m).exp();
        let ds = (-1.0 / k.eps_tau_s).exp();
        let norm = k.eps_norm();
        for l in (0..top).rev() {
            let w_above = &self.layers[l + 1];
            let (n_above, n) = (w_above.rows(), w_above.cols());
            let n_in = self.layers[l].cols();
            // backpropagated error, then anti-causal PSP filtering
            let mut back = vec![0.0; n * t_len];
            for t in 0..t_len {
                let d = &delta[t * n_above..(t + 1) * n_above];
                let b = &mut back[t * n..(t + 1) * n];
                for (o, &dv) in d.iter().enumerate() {
                    if dv != 0.0 {
                        for (bv, &wv) in b.iter_mut().zip(w_above.row(o)) {
                            *bv += dv * wv;
                        }
                    }
                }
            }
            let mut elig = vec![0.0; n * t_len];
            let mut bm = vec![0.0; n];
            let mut bs = vec![0.0; n];
            for t in (0..t_len).rev() {
                for h in 0..n {
                    elig[t * n + h] = norm * (bm[h] - bs[h]);
                    bm[h] = dm * (back[t * n + h] + bm[h]);
                    bs[h] = ds * (back[t * n + h] + bs[h]);
                }
            }
            // credit only where the hidden neuron actually fired
            let spikes = &hidden_spikes[l];
            let psp_in = &psps[l];
            let g = &mut grads[l];
            let mut next_delta = vec![0.0; n * t_len];
            for t in 0..t_len {
                let x = &psp_in[t * n_in..(t + 1) * n_in];
                for h in 0..n {
                    if spikes.get(h, t) {
                        let e = k.beta * elig[t * n + h];
                        next_delta[t * n + h] = e;
                        for (gv, &xv) in g.row_mut(h).iter_mut().zip(x) {
                            *gv += e * xv;
                        }
                    }
                }
            }
            delta = next_delta;
        }
        ll
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(Matrix::is_finite)
    }
}

/// `g[o][i] += Σ_t delta[t][o] · x[t][i]` for step-major inputs.
fn accumulate_outer(g: &mut Matrix, delta: &[f64], x: &[f64], t_len: usize) {
    let (n, n_in) = (g.rows(), g.cols());
    for t in 0..t_len {
        let xt = &x[t * n_in..(t + 1) * n_in];
        for o in 0..n {
            let d = delta[t * n + o];
            if d != 0.0 {
                for (gv, &xv) in g.row_mut(o).iter_mut().zip(xt) {
                    *gv += d * xv;
                }
            }
        }
    }
}

/// Mini-batch gradient ascent on the target log-likelihood.
pub fn prob_bp_train(
    train: &[KeyValueRecord],
    codebook: &CteCodebook,
    targets: &TargetPatternSet,
    cfg: &TrainConfig,
) -> Result<(SrmNetwork, Vec<EpochLog>)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    if targets.pattern(0).n_steps() != codebook.n_steps() {
        return Err(Error::Shape("target and input windows differ".into()));
    }
    let sizes = cfg.layer_sizes(codebook.n_inputs(), targets.n_classes());
    let mut net = SrmNetwork::init(&sizes, cfg)?;
    let inputs: Vec<SpikePattern> = train.iter().map(|r| codebook.encode(r)).collect::<Result<_>>()?;
    let mut grads: Vec<Matrix> = net.layers.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut stream_rng(cfg.seed, &[stream::ORDER, epoch as u64]));
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            for g in &mut grads {
                g.as_mut_slice().fill(0.0);
            }
            for &i in batch {
                let mut rng = stream_rng(cfg.seed, &[stream::SAMPLE, epoch as u64, i as u64]);
                total += net.sample_gradient(&inputs[i], targets.pattern(train[i].label), &mut rng, &mut grads);
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for (w, g) in net.layers.iter_mut().zip(&grads) {
                for (wv, gv) in w.as_mut_slice().iter_mut().zip(g.as_slice()) {
                    *wv += step * gv;
                }
            }
        }
        let mean = -total / train.len() as f64;
        if !mean.is_finite() || !net.is_finite() {
            return Err(Error::Diverged {
                epoch,
                reason: "non-finite log-likelihood".into(),
            });
        }
        log::debug!("prob-bp epoch {epoch}: nll {mean:.5}");
        log.push(EpochLog { epoch, loss: mean });
    }
    Ok((net, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuron::psp_traces;

    #[test]
    fn output_gradient_matches_finite_differences() {
        // three output neurons over a frozen two-neuron input sample
        let k = SrmKernels {
            threshold: 1.0,
            beta: 2.0,
            ..Default::default()
        };
        let input = SpikePattern::from_times(2, 30, &[vec![1, 4, 9, 15, 22], vec![3, 11, 12, 25]]);
        let target = SpikePattern::from_times(3, 30, &[vec![6, 18], vec![13], vec![]]);
        let net = SrmNetwork {
            layers: vec![Matrix::from_vec(3, 2, vec![0.8, -0.3, 0.2, 1.1, -0.5, 0.4])],
            kernels: k,
        };
        let psp = psp_traces(&input, &k);
        let (_, g) = net.output_gradient(&psp, &target);
        let h = 1e-6;
        for idx in 0..6 {
            let mut p = net.clone();
            p.layers[0].as_mut_slice()[idx] += h;
            let mut m = net.clone();
            m.layers[0].as_mut_slice()[idx] -= h;
            let num = (p.output_log_likelihood(&psp, &target).0 - m.output_log_likelihood(&psp, &target).0) / (2.0 * h);
            let a = g.as_slice()[idx];
            let rel = (a - num).abs() / a.abs().max(num.abs()).max(1e-7);
            assert!(rel < 1e-4, "weight {idx}: {a} vs {num}");
        }
    }

    #[test]
    fn deterministic_inference_fires_on_strong_drive() {
        let k = SrmKernels::default();
        let net = SrmNetwork {
            layers: vec![Matrix::from_vec(1, 1, vec![10.0])],
            kernels: k,
        };
        let input = SpikePattern::from_times(1, 20, &[vec![2]]);
        let out = net.infer::<rand_chacha::ChaCha8Rng>(&input, None);
        let first = out.spike_times(0)[0];
        assert!(first > 2, "causal kernel");
        assert!(10.0 * k.eps(first as i64 - 2) >= k.threshold);
    }
}
