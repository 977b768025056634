//! Deterministic backpropagation through time for stacked SNU layers.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::{Surrogate, TrainConfig};
use super::{init_uniform, EpochLog};
use crate::dataset::KeyValueRecord;
use crate::encoding::{CteCodebook, SpikePattern, TargetPatternSet};
use crate::error::{Error, Result};
use crate::neuron::{softplus, spike_probability, OutputActivation, SnuLayer, StateActivation};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnuNetwork {
    pub layers: Vec<SnuLayer>,
    pub g: StateActivation,
    /// Surrogate steepness used in training; inference uses a hard step.
    pub steepness: f64,
}

/// Per-layer synaptic drive `W x_t` for binary inputs given by their active
/// indices. Software inference uses the weights directly; the crossbar
/// simulator substitutes its analog read-out.
pub trait DriveFn {
    fn drive(&mut self, layer: usize, active: &[usize], out: &mut [f64]);
}

struct SoftwareDrive<'a>(&'a SnuNetwork);

impl DriveFn for SoftwareDrive<'_> {
    fn drive(&mut self, layer: usize, active: &[usize], out: &mut [f64]) {
        self.0.layers[layer].weights.matvec_sparse_into(active, out);
    }
}

impl SnuNetwork {
    pub fn init(sizes: &[usize], cfg: &TrainConfig) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Config("an SNU network needs at least one layer".into()));
        }
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(l, w)| SnuLayer {
                weights: init_uniform(w[1], w[0], cfg.seed, l as u64),
                leak: cfg.snu.leak,
                bias: vec![-cfg.snu.threshold; w[1]],
            })
            .collect();
        Ok(Self {
            layers,
            g: cfg.snu.g,
            steepness: cfg.snu.steepness,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().map_or(0, SnuLayer::n_out)
    }

    /// Hard-step inference; returns the output spike pattern.
    pub fn infer(&self, input: &[Vec<usize>]) -> SpikePattern {
        self.infer_with(input, &mut SoftwareDrive(self))
    }

    /// Hard-step inference with a caller-supplied synaptic read-out.
    pub fn infer_with(&self, input: &[Vec<usize>], drive: &mut dyn DriveFn) -> SpikePattern {
        let t_len = input.len();
        let mut s: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.n_out()]).collect();
        let mut y = s.clone();
        let mut wx = s.clone();
        let mut out = SpikePattern::zeros(self.n_outputs(), t_len);
        let mut active = Vec::new();
        for (t, inp) in input.iter().enumerate() {
            active.clear();
            active.extend_from_slice(inp);
            for (l, layer) in self.layers.iter().enumerate() {
                drive.drive(l, &active, &mut wx[l]);
                active.clear();
                for i in 0..layer.n_out() {
                    let st = self.g.apply(wx[l][i] + layer.leak * s[l][i] * (1.0 - y[l][i]));
                    let yt = OutputActivation::Step.apply(st + layer.bias[i]);
                    s[l][i] = st;
                    y[l][i] = yt;
                    if yt > 0.0 {
                        active.push(i);
                    }
                }
            }
            for &i in &active {
                out.set(i, t, true);
            }
        }
        out
    }

    /// Soft forward pass with sigmoid outputs everywhere.
    pub fn infer_soft(&self, input: &[Vec<usize>]) -> Vec<Vec<f64>> {
        let tape = self.forward(input, Surrogate::Soft);
        let last = tape.last().expect("at least one layer");
        (0..input.len()).map(|t| last.p_at(t).to_vec()).collect()
    }

    fn forward(&self, input: &[Vec<usize>], mode: Surrogate) -> Vec<Tape> {
        let t_len = input.len();
        let mut tapes: Vec<Tape> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let n = layer.n_out();
            let mut tape = Tape::new(n, t_len);
            let mut wx = vec![0.0; n];
            for t in 0..t_len {
                match tapes.last() {
                    None => layer.weights.matvec_sparse_into(&input[t], &mut wx),
                    Some(prev) => layer.weights.matvec_into(prev.y_at(t), &mut wx),
                }
                for i in 0..n {
                    let carry = if t == 0 {
                        0.0
                    } else {
                        layer.leak * tape.s[(t - 1) * n + i] * (1.0 - tape.y[(t - 1) * n + i])
                    };
                    let pre = wx[i] + carry;
                    let s = self.g.apply(pre);
                    let p = spike_probability(s + layer.bias[i], self.steepness);
                    let y = match mode {
                        Surrogate::Soft => p,
                        Surrogate::StraightThrough => OutputActivation::Step.apply(s + layer.bias[i]),
                    };
                    let k = t * n + i;
                    tape.pre[k] = pre;
                    tape.s[k] = s;
                    tape.p[k] = p;
                    tape.y[k] = y;
                }
            }
            tapes.push(tape);
        }
        tapes
    }

    /// Summed per-step binary cross-entropy of the sigmoid outputs against
    /// `target`, and its gradient accumulated into `grads`.
    fn loss_and_grad(&self, input: &[Vec<usize>], target: &SpikePattern, mode: Surrogate, grads: &mut Grads) -> f64 {
        let tapes = self.forward(input, mode);
        let t_len = input.len();
        let k = self.steepness;
        let top = self.layers.len() - 1;
        let mut loss = 0.0;
        // dL/dy_t of the layer being processed, coming from the layer above
        let mut dy_ext: Vec<f64> = Vec::new();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let tape = &tapes[l];
            let n = layer.n_out();
            let n_in = layer.n_in();
            let mut dy_below = if l > 0 { vec![0.0; t_len * n_in] } else { Vec::new() };
            let mut dpre_next = vec![0.0; n];
            let mut dpre = vec![0.0; n];
            let gw = &mut grads.w[l];
            for t in (0..t_len).rev() {
                for i in 0..n {
                    let idx = t * n + i;
                    let (s, p, y) = (tape.s[idx], tape.p[idx], tape.y[idx]);
                    let mut dy = if l == top { 0.0 } else { dy_ext[idx] };
                    if t + 1 < t_len {
                        dy -= dpre_next[i] * layer.leak * s;
                    }
                    let mut d = dy * k * p * (1.0 - p);
                    if l == top {
                        let z = target.get(i, t) as u8 as f64;
                        let logit = k * (s + layer.bias[i]);
                        loss += softplus(logit) - z * logit;
                        d += k * (p - z);
                    }
                    let mut ds = d;
                    if t + 1 < t_len {
                        ds += dpre_next[i] * layer.leak * (1.0 - y);
                    }
                    dpre[i] = ds * self.g.derivative(tape.pre[idx]);
                    grads.b[l][i] += d;
                }
                if l == 0 {
                    for (i, &dp) in dpre.iter().enumerate() {
                        if dp != 0.0 {
                            let row = gw.row_mut(i);
                            for &c in &input[t] {
                                row[c] += dp;
                            }
                        }
                    }
                } else {
                    let x = tapes[l - 1].y_at(t);
                    let below = &mut dy_below[t * n_in..(t + 1) * n_in];
                    for (i, &dp) in dpre.iter().enumerate() {
                        if dp != 0.0 {
                            let row = gw.row_mut(i);
                            for (r, &xv) in row.iter_mut().zip(x) {
                                *r += dp * xv;
                            }
                            for (b, &w) in below.iter_mut().zip(layer.weights.row(i)) {
                                *b += dp * w;
                            }
                        }
                    }
                }
                std::mem::swap(&mut dpre_next, &mut dpre);
            }
            dy_ext = dy_below;
        }
        loss
    }

    /// Loss of one sample under the given forward mode.
    pub fn loss(&self, input: &[Vec<usize>], target: &SpikePattern, mode: Surrogate) -> f64 {
        let mut g = Grads::zeros(self);
        self.loss_and_grad(input, target, mode, &mut g)
    }

    /// Gradient of [`SnuNetwork::loss`] with respect to every weight and bias.
    pub fn gradient(&self, input: &[Vec<usize>], target: &SpikePattern, mode: Surrogate) -> Grads {
        let mut g = Grads::zeros(self);
        self.loss_and_grad(input, target, mode, &mut g);
        g
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

struct Tape {
    n: usize,
    pre: Vec<f64>,
    s: Vec<f64>,
    p: Vec<f64>,
    y: Vec<f64>,
}

impl Tape {
    fn new(n: usize, t_len: usize) -> Self {
        Self {
            n,
            pre: vec![0.0; n * t_len],
            s: vec![0.0; n * t_len],
            p: vec![0.0; n * t_len],
            y: vec![0.0; n * t_len],
        }
    }

    fn y_at(&self, t: usize) -> &[f64] {
        &self.y[t * self.n..(t + 1) * self.n]
    }

    fn p_at(&self, t: usize) -> &[f64] {
        &self.p[t * self.n..(t + 1) * self.n]
    }
}

/// Gradients shaped like the network parameters.
#[derive(Debug, Clone)]
pub struct Grads {
    pub w: Vec<crate::Matrix>,
    pub b: Vec<Vec<f64>>,
}

impl Grads {
    fn zeros(net: &SnuNetwork) -> Self {
        Self {
            w: net
                .layers
                .iter()
                .map(|l| crate::Matrix::zeros(l.n_out(), l.n_in()))
                .collect(),
            b: net.layers.iter().map(|l| vec![0.0; l.n_out()]).collect(),
        }
    }

    fn clear(&mut self) {
        for m in &mut self.w {
            m.as_mut_slice().fill(0.0);
        }
        for b in &mut self.b {
            b.fill(0.0);
        }
    }
}

/// Mini-batch SGD on the summed per-step cross-entropy.
pub fn snu_bpt_train(
    train: &[KeyValueRecord],
    codebook: &CteCodebook,
    targets: &TargetPatternSet,
    cfg: &TrainConfig,
) -> Result<(SnuNetwork, Vec<EpochLog>)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    if targets.pattern(0).n_steps() != codebook.n_steps() {
        return Err(Error::Shape(format!(
            "targets span {} steps, inputs {}",
            targets.pattern(0).n_steps(),
            codebook.n_steps()
        )));
    }
    let sizes = cfg.layer_sizes(codebook.n_inputs(), targets.n_classes());
    if *sizes.last().unwrap() != targets.n_out() {
        return Err(Error::Shape("output layer does not match the target patterns".into()));
    }
    let inputs: Vec<Vec<Vec<usize>>> = train
        .iter()
        .map(|r| codebook.encode(r).map(|p| p.active_by_step()))
        .collect::<Result<_>>()?;
    let mut net = SnuNetwork::init(&sizes, cfg)?;
    let mut grads = Grads::zeros(&net);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut stream_rng(cfg.seed, &[stream::ORDER, epoch as u64]));
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            for &i in batch {
                total += net.loss_and_grad(&inputs[i], targets.pattern(train[i].label), cfg.snu.surrogate, &mut grads);
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for (layer, (gw, gb)) in net.layers.iter_mut().zip(grads.w.iter().zip(&grads.b)) {
                for (w, g) in layer.weights.as_mut_slice().iter_mut().zip(gw.as_slice()) {
                    *w -= step * g;
                }
                if cfg.snu.train_bias {
                    for (b, g) in layer.bias.iter_mut().zip(gb) {
                        *b -= step * g;
                    }
                }
            }
        }
        let mean = total / train.len() as f64;
        if !mean.is_finite() || !net.is_finite() {
            return Err(Error::Diverged {
                epoch,
                reason: "non-finite loss or weights".into(),
            });
        }
        log::debug!("snu epoch {epoch}: loss {mean:.5}");
        log.push(EpochLog { epoch, loss: mean });
    }
    Ok((net, log))
}
