//! Inference of a trained SNU network on simulated memristive crossbars.
//!
//! Each weight matrix is programmed into a differential pair of conductance
//! arrays, perturbed by conductance-dependent noise, read out as an analog
//! matrix-vector product, quantized by an 8-bit ADC and scaled back to the
//! pre-activation range seen on training data. The neuron dynamics stay in
//! software.

mod crossbar;
mod noise;

pub use crossbar::{crossbar_forward, map_weights, percentile, CrossbarConfig, CrossbarLayer, MappedWeights};
pub use noise::{apply_noise, NoiseModel};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::KeyValueRecord;
use crate::encoding::{CteCodebook, SpikePattern, TemporalDecoder};
use crate::learning::{ConfusionMatrix, DriveFn, Evaluation, NetworkParams, SnuNetwork, TrainedModel};
use crate::{Error, Result};

/// Full-scale output of every layer: the configured percentile of
/// |pre-activation| over a strided subset of `train`, from software inference.
pub fn calibrate(net: &SnuNetwork, codebook: &CteCodebook, train: &[KeyValueRecord], cfg: &CrossbarConfig) -> Result<Vec<f64>> {
    if train.is_empty() {
        return Err(Error::Uncalibrated(0));
    }
    struct Recorder<'a> {
        net: &'a SnuNetwork,
        seen: Vec<Vec<f64>>,
    }
    impl DriveFn for Recorder<'_> {
        fn drive(&mut self, layer: usize, active: &[usize], out: &mut [f64]) {
            self.net.layers[layer].weights.matvec_sparse_into(active, out);
            self.seen[layer].extend(out.iter().map(|v| v.abs()));
        }
    }
    let mut rec = Recorder {
        net,
        seen: vec![Vec::new(); net.layers.len()],
    };
    let stride = (train.len() / cfg.calibration_records.max(1)).max(1);
    for r in train.iter().step_by(stride) {
        net.infer_with(&codebook.encode(r)?.active_by_step(), &mut rec);
    }
    Ok(rec
        .seen
        .iter_mut()
        .enumerate()
        .map(|(l, v)| {
            let p = percentile(v, cfg.calibration_percentile);
            if p > 0.0 {
                p
            } else {
                let m = v.iter().cloned().fold(0.0, f64::max);
                if m > 0.0 {
                    m
                } else {
                    log::warn!("layer {l} saw no input during calibration; using unit output scale");
                    1.0
                }
            }
        })
        .collect())
}

/// SNU network whose synaptic read-out goes through crossbar arrays.
#[derive(Debug, Clone)]
pub struct HardwareNetwork<'a> {
    net: &'a SnuNetwork,
    layers: Vec<CrossbarLayer>,
    cfg: CrossbarConfig,
}

impl<'a> HardwareNetwork<'a> {
    /// Noise-free programming of every layer.
    pub fn program(net: &'a SnuNetwork, output_scales: &[f64], cfg: &CrossbarConfig) -> Result<Self> {
        let layers = net
            .layers
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                let s = *output_scales.get(l).ok_or(Error::Uncalibrated(l))?;
                CrossbarLayer::new(map_weights(&layer.weights, cfg.g_max), s)
            })
            .collect::<Result<_>>()?;
        Ok(Self { net, layers, cfg: *cfg })
    }

    pub fn layers(&self) -> &[CrossbarLayer] {
        &self.layers
    }

    /// Copy with noisy devices. `sample` selects an independent draw per test
    /// record; `None` is the single programming shared by a whole run.
    pub fn with_noise(&self, noise: &NoiseModel, sample: Option<u64>) -> Self {
        let s = sample.unwrap_or(u64::MAX);
        Self {
            net: self.net,
            layers: self
                .layers
                .iter()
                .enumerate()
                .map(|(l, x)| x.programmed(noise, self.cfg.g_max, &[l as u64, s]))
                .collect(),
            cfg: self.cfg,
        }
    }

    pub fn infer(&self, input: &[Vec<usize>]) -> SpikePattern {
        let mut drive = CrossbarDrive {
            layers: &self.layers,
            cfg: &self.cfg,
        };
        self.net.infer_with(input, &mut drive)
    }
}

struct CrossbarDrive<'b> {
    layers: &'b [CrossbarLayer],
    cfg: &'b CrossbarConfig,
}

impl DriveFn for CrossbarDrive<'_> {
    fn drive(&mut self, layer: usize, active: &[usize], out: &mut [f64]) {
        let x = &self.layers[layer];
        x.analog_sparse(active, out);
        if self.cfg.quantize {
            x.quantize(out, None, self.cfg.adc_levels);
        }
    }
}

/// A trained SNU model mapped onto calibrated, noise-free arrays; noisy
/// evaluations are derived from it.
pub struct HardwareSim<'a> {
    base: HardwareNetwork<'a>,
    codebook: CteCodebook,
    decoder: TemporalDecoder,
    n_classes: usize,
}

impl<'a> HardwareSim<'a> {
    pub fn new(model: &'a TrainedModel, calibration: &[KeyValueRecord], cfg: &CrossbarConfig) -> Result<Self> {
        let NetworkParams::Snu(net) = &model.network else {
            return Err(Error::Config(format!("hardware simulation needs an SNU model, got {}", model.kind)));
        };
        let predictor = model.predictor()?;
        let codebook = predictor.codebook().clone();
        let decoder = predictor.decoder().expect("SNU models are temporal").clone();
        let scales = calibrate(net, &codebook, calibration, cfg)?;
        Ok(Self {
            base: HardwareNetwork::program(net, &scales, cfg)?,
            codebook,
            decoder,
            n_classes: model.n_classes(),
        })
    }

    pub fn network(&self) -> &HardwareNetwork<'a> {
        &self.base
    }

    pub fn output_scales(&self) -> Vec<f64> {
        self.base.layers.iter().map(|l| l.output_scale).collect()
    }

    pub fn evaluate(&self, test: &[KeyValueRecord], noise: &NoiseModel) -> Result<Evaluation> {
        noise.validate(self.base.cfg.g_max)?;
        if test.is_empty() {
            return Err(Error::EmptyTestSet);
        }
        let shared = (!self.base.cfg.resample_per_sample).then(|| self.base.with_noise(noise, None));
        let mut confusion = ConfusionMatrix::new(self.n_classes);
        for (i, r) in test.iter().enumerate() {
            let input = self.codebook.encode(r)?.active_by_step();
            let out = match &shared {
                Some(hw) => hw.infer(&input),
                None => self.base.with_noise(noise, Some(i as u64)).infer(&input),
            };
            confusion.add(r.label, self.decoder.decode(&out)?);
        }
        Ok(Evaluation {
            accuracy: confusion.accuracy(),
            confusion,
        })
    }
}

/// One-shot hardware evaluation: calibrate on `calibration`, program with
/// `noise`, classify `test`.
pub fn hw_evaluate(
    model: &TrainedModel,
    calibration: &[KeyValueRecord],
    test: &[KeyValueRecord],
    noise: &NoiseModel,
    cfg: &CrossbarConfig,
) -> Result<Evaluation> {
    HardwareSim::new(model, calibration, cfg)?.evaluate(test, noise)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub noise_scale: f64,
    pub seed: u64,
    pub accuracy: f64,
}

/// Accuracy for every (scale, seed) pair, scales outermost.
pub fn noise_sweep(
    sim: &HardwareSim<'_>,
    dataset: &str,
    test: &[KeyValueRecord],
    noise: &NoiseModel,
    scales: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(scales.len() * seeds.len());
    for &noise_scale in scales {
        for &seed in seeds {
            let e = sim.evaluate(test, &noise.with_scale(noise_scale).with_seed(seed))?;
            log::info!("noise x{noise_scale} seed {seed}: {:.4}", e.accuracy);
            rows.push(SweepRow {
                dataset: dataset.to_string(),
                noise_scale,
                seed,
                accuracy: e.accuracy,
            });
        }
    }
    Ok(rows)
}

/// Mean accuracy per noise scale, in first-appearance order.
pub fn mean_by_scale(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(s, _, _)| *s == r.noise_scale) {
            Some(e) => {
                e.1 += r.accuracy;
                e.2 += 1;
            }
            None => out.push((r.noise_scale, r.accuracy, 1)),
        }
    }
    out.into_iter().map(|(s, a, n)| (s, a / n as f64)).collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush().map_err(|e| Error::io("<sweep csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::TrainConfig;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn random_inputs(n_in: usize, t: usize, seed: u64) -> Vec<Vec<usize>> {
        let mut rng = stream_rng(seed, &[]);
        (0..t).map(|_| (0..n_in).filter(|_| rng.random_bool(0.2)).collect()).collect()
    }

    fn net() -> SnuNetwork {
        let cfg = TrainConfig {
            seed: 4,
            ..Default::default()
        };
        let mut n = SnuNetwork::init(&[12, 8, 3], &cfg).unwrap();
        // lower thresholds so the untrained network actually spikes
        for l in &mut n.layers {
            l.bias.iter_mut().for_each(|b| *b = -0.2);
        }
        n
    }

    #[test]
    fn ideal_read_out_reproduces_software() {
        let n = net();
        let cfg = CrossbarConfig {
            quantize: false,
            ..Default::default()
        };
        let hw = HardwareNetwork::program(&n, &[1.0, 1.0], &cfg).unwrap();
        let mut spikes = 0;
        for s in 0..30 {
            let x = random_inputs(12, 40, s);
            let sw = n.infer(&x);
            spikes += sw.total_spikes();
            assert_eq!(hw.infer(&x), sw);
        }
        assert!(spikes > 0);
    }

    #[test]
    fn noise_draws_are_reproducible() {
        let n = net();
        let hw = HardwareNetwork::program(&n, &[1.0, 1.0], &CrossbarConfig::default()).unwrap();
        let m = NoiseModel::default().with_scale(5.0).with_seed(3);
        let a = hw.with_noise(&m, None);
        let b = hw.with_noise(&m, None);
        for (x, y) in a.layers().iter().zip(b.layers()) {
            assert_eq!(x.mapped, y.mapped);
        }
        assert_ne!(a.layers()[0].mapped, hw.with_noise(&m, Some(0)).layers()[0].mapped);
    }

    #[test]
    fn sweep_rows_and_means() {
        let rows: Vec<SweepRow> = [0.0, 1.0]
            .iter()
            .flat_map(|&s| {
                (0..3).map(move |seed| SweepRow {
                    dataset: "toy".into(),
                    noise_scale: s,
                    seed,
                    accuracy: 1.0 - s * 0.1 - seed as f64 * 0.01,
                })
            })
            .collect();
        let m = mean_by_scale(&rows);
        assert_eq!(m.len(), 2);
        assert!((m[1].1 - 0.89).abs() < 1e-12);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "dataset,noise_scale,seed,accuracy");
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn calibration_needs_records() {
        let n = net();
        let cb = CteCodebook::from_cardinalities(vec![3, 3], Default::default()).unwrap();
        assert!(matches!(calibrate(&n, &cb, &[], &CrossbarConfig::default()), Err(Error::Uncalibrated(0))));
    }
}
