//! One-layer LIF network trained with pair-based STDP, winner-take-all
//! lateral inhibition and adaptive thresholds.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{ModelKind, StdpParams, TrainConfig, UnsupDecoder};
use super::EpochLog;
use crate::dataset::KeyValueRecord;
use crate::encoding::{decode_rate, kernel_traces, CteCodebook, SpikePattern, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdpNetwork {
    /// neurons × inputs, within [w_min, w_max]
    pub weights: Matrix,
    /// Adaptive threshold offsets, frozen after training.
    pub theta: Vec<f64>,
    pub params: StdpParams,
    /// Class of every output neuron.
    pub class_map: Vec<usize>,
    /// Per-class mean output traces for van Rossum read-out (unsupervised).
    pub prototypes: Option<Matrix>,
}

/// Per-presentation simulation state.
struct Sim {
    membrane: Vec<f64>,
    refractory: Vec<usize>,
    pre_trace: Vec<f64>,
    post_trace: Vec<f64>,
    current: Vec<f64>,
}

impl Sim {
    fn new(n: usize, n_in: usize) -> Self {
        Self {
            membrane: vec![0.0; n],
            refractory: vec![0; n],
            pre_trace: vec![0.0; n_in],
            post_trace: vec![0.0; n],
            current: vec![0.0; n],
        }
    }

    fn reset(&mut self, resting: f64) {
        self.membrane.fill(resting);
        self.refractory.fill(0);
        self.pre_trace.fill(0.0);
        self.post_trace.fill(0.0);
    }
}

/// What a presentation may change.
#[derive(Clone, Copy)]
enum Mode<'a> {
    Infer { gain: f64 },
    /// Learn; `eligible` restricts which neurons may win.
    Learn { eligible: Option<&'a [usize]> },
}

impl StdpNetwork {
    fn new(n: usize, n_in: usize, params: StdpParams, class_map: Vec<usize>, seed: u64) -> Self {
        let mut rng = stream_rng(seed, &[stream::INIT, 0]);
        let hi = params.init_max.clamp(params.w_min, params.w_max);
        let weights = Matrix::from_fn(n, n_in, |_, _| {
            if hi > params.w_min {
                rng.random_range(params.w_min..hi)
            } else {
                params.w_min
            }
        });
        let mut net = Self {
            weights,
            theta: vec![0.0; n],
            params,
            class_map,
            prototypes: None,
        };
        net.normalize();
        net
    }

    pub fn n_neurons(&self) -> usize {
        self.weights.rows()
    }

    fn normalize(&mut self) {
        let p = self.params;
        if p.weight_norm <= 0.0 {
            return;
        }
        let target = p.weight_norm * self.weights.cols() as f64;
        for r in 0..self.weights.rows() {
            let row = self.weights.row_mut(r);
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                let f = target / sum;
                for w in row {
                    *w = (*w * f).clamp(p.w_min, p.w_max);
                }
            }
        }
    }

    /// Runs one presentation, applying STDP when learning; returns the output
    /// spike pattern.
    fn present(&mut self, input: &[Vec<usize>], sim: &mut Sim, mode: Mode<'_>) -> SpikePattern {
        let p = self.params;
        let n = self.n_neurons();
        let t_len = input.len();
        let dec_pre = (-1.0 / p.tau_plus).exp();
        let dec_post = (-1.0 / p.tau_minus).exp();
        sim.reset(p.lif.resting);
        let mut out = SpikePattern::zeros(n, t_len);
        let (learn, eligible, gain) = match mode {
            Mode::Infer { gain } => (false, None, gain),
            Mode::Learn { eligible } => (true, eligible, 1.0),
        };
        for (t, active) in input.iter().enumerate() {
            for v in &mut sim.pre_trace {
                *v *= dec_pre;
            }
            for v in &mut sim.post_trace {
                *v *= dec_post;
            }
            if learn {
                // depression: pre spike after post activity
                for &i in active {
                    for j in 0..n {
                        let pt = sim.post_trace[j];
                        if pt > 0.0 {
                            let w = self.weights.get(j, i) - p.a_minus * pt;
                            self.weights.set(j, i, w.clamp(p.w_min, p.w_max));
                        }
                    }
                }
            }
            for &i in active {
                sim.pre_trace[i] += 1.0;
            }
            self.weights.matvec_sparse_into(active, &mut sim.current);
            let mut winner: Option<(usize, f64)> = None;
            for j in 0..n {
                if sim.refractory[j] > 0 {
                    sim.refractory[j] -= 1;
                    continue;
                }
                let m = p.lif.resting + p.lif.leak_factor * (sim.membrane[j] - p.lif.resting) + gain * sim.current[j];
                sim.membrane[j] = m;
                let over = m - (p.lif.threshold + self.theta[j]);
                let allowed = eligible.is_none_or(|e| e.contains(&j));
                if over >= 0.0 && allowed && winner.is_none_or(|(_, best)| over > best) {
                    winner = Some((j, over));
                }
            }
            if let Some((j, _)) = winner {
                out.set(j, t, true);
                sim.membrane[j] = p.lif.resting;
                sim.refractory[j] = p.lif.refractory;
                for (k, m) in sim.membrane.iter_mut().enumerate() {
                    if k != j {
                        *m = (*m - p.inhibition).max(p.lif.resting - p.inhibition);
                    }
                }
                if learn {
                    // potentiation: post spike after pre activity
                    let row = self.weights.row_mut(j);
                    for (w, &x) in row.iter_mut().zip(&sim.pre_trace) {
                        if x > 0.0 {
                            *w = (*w + p.a_plus * x).clamp(p.w_min, p.w_max);
                        }
                    }
                    self.theta[j] += p.theta_plus;
                }
                sim.post_trace[j] += 1.0;
            }
            if learn {
                for th in &mut self.theta {
                    *th *= p.theta_decay;
                }
            }
        }
        out
    }

    /// Output pattern for a test input; re-presents with doubled gain while
    /// the network stays silent, up to `max_boosts` times.
    pub fn respond(&self, input: &[Vec<usize>]) -> SpikePattern {
        let mut net = self.clone();
        let mut sim = Sim::new(self.n_neurons(), self.weights.cols());
        let mut gain = 1.0;
        let mut out = net.present(input, &mut sim, Mode::Infer { gain });
        for _ in 0..self.params.max_boosts {
            if out.total_spikes() > 0 {
                break;
            }
            gain *= 2.0;
            out = net.present(input, &mut sim, Mode::Infer { gain });
        }
        out
    }

    pub fn predict(&self, input: &[Vec<usize>]) -> usize {
        let out = self.respond(input);
        match (&self.prototypes, self.params.decoder) {
            (Some(proto), UnsupDecoder::VanRossum) => nearest_prototype(&out, proto),
            _ => decode_rate(&out, &self.class_map),
        }
    }
}

fn nearest_prototype(out: &SpikePattern, proto: &Matrix) -> usize {
    let tr = kernel_traces(out, DEFAULT_TAU);
    let mut best = (0, f64::INFINITY);
    for c in 0..proto.rows() {
        let d: f64 = proto.row(c).iter().zip(&tr).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

/// Trains either STDP variant; `cfg.kind` selects supervision.
pub fn stdp_train(train: &[KeyValueRecord], n_classes: usize, codebook: &CteCodebook, cfg: &TrainConfig) -> Result<(StdpNetwork, Vec<EpochLog>)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    let supervised = match cfg.kind {
        ModelKind::StdpSup => true,
        ModelKind::StdpUnsup => false,
        k => return Err(Error::Config(format!("{k} is not an STDP model"))),
    };
    let p = cfg.stdp;
    let n = cfg.n_out(n_classes);
    if n == 0 {
        return Err(Error::Config("STDP network needs output neurons".into()));
    }
    let class_map: Vec<usize> = if supervised {
        (0..n).map(|j| j / p.neurons_per_class).collect()
    } else {
        vec![0; n]
    };
    let groups: Vec<Vec<usize>> = (0..n_classes)
        .map(|c| (0..n).filter(|&j| class_map[j] == c).collect())
        .collect();
    let mut net = StdpNetwork::new(n, codebook.n_inputs(), p, class_map, cfg.seed);
    let encode = |r: &KeyValueRecord| codebook.encode(r).map(|x| x.active_by_step());
    let mut sim = Sim::new(n, codebook.n_inputs());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut stream_rng(cfg.seed, &[stream::ORDER, epoch as u64]));
        let mut spikes = 0usize;
        for &i in &order {
            let input = encode(&train[i])?;
            let eligible = supervised.then(|| groups[train[i].label].as_slice());
            spikes += net.present(&input, &mut sim, Mode::Learn { eligible }).total_spikes();
            net.normalize();
        }
        if spikes == 0 {
            return Err(Error::DeadNetwork { epoch });
        }
        log::debug!("stdp epoch {epoch}: {spikes} output spikes");
        log.push(EpochLog {
            epoch,
            loss: spikes as f64 / train.len() as f64,
        });
    }
    if !supervised {
        label_neurons(&mut net, train, n_classes, &encode)?;
    }
    Ok((net, log))
}

/// Labelled pass without plasticity: assigns each neuron the class with the
/// highest mean response and builds per-class mean output traces.
fn label_neurons(
    net: &mut StdpNetwork,
    train: &[KeyValueRecord],
    n_classes: usize,
    encode: &dyn Fn(&KeyValueRecord) -> Result<Vec<Vec<usize>>>,
) -> Result<()> {
    let n = net.n_neurons();
    let mut response = Matrix::zeros(n, n_classes);
    let mut counts = vec![0usize; n_classes];
    let mut proto: Option<Matrix> = None;
    for r in train {
        let out = net.respond(&encode(r)?);
        counts[r.label] += 1;
        for (j, c) in out.neuron_counts().into_iter().enumerate() {
            response.set(j, r.label, response.get(j, r.label) + c as f64);
        }
        let tr = kernel_traces(&out, DEFAULT_TAU);
        let pm = proto.get_or_insert_with(|| Matrix::zeros(n_classes, tr.len()));
        for (a, b) in pm.row_mut(r.label).iter_mut().zip(&tr) {
            *a += b;
        }
    }
    let mut proto = proto.expect("non-empty training set");
    for c in 0..n_classes {
        if counts[c] > 0 {
            for v in proto.row_mut(c) {
                *v /= counts[c] as f64;
            }
        } else {
            // never seen: unreachable prototype
            proto.row_mut(c).fill(f64::INFINITY);
        }
    }
    for j in 0..n {
        let mut best = (0, f64::NEG_INFINITY);
        for c in 0..n_classes {
            if counts[c] > 0 {
                let mean = response.get(j, c) / counts[c] as f64;
                if mean > best.1 {
                    best = (c, mean);
                }
            }
        }
        net.class_map[j] = best.0;
    }
    net.prototypes = Some(proto);
    Ok(())
}
