use serde::{Deserialize, Serialize};

use crate::baseline::LogRegConfig;
use crate::encoding::{CteConfig, TargetConfig};
use crate::error::{Error, Result};
use crate::neuron::{LifParams, SrmKernels, StateActivation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    StdpUnsup,
    StdpSup,
    ProbBp,
    SnuBp,
    /// Multinomial logistic regression over one-hot features (baseline).
    #[serde(rename = "logreg")]
    LogReg,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::StdpUnsup => "stdp-unsup",
            Self::StdpSup => "stdp-sup",
            Self::ProbBp => "prob-bp",
            Self::SnuBp => "snu-bp",
            Self::LogReg => "logreg",
        }
    }

    /// Models decoded against class target patterns.
    pub fn is_temporal(self) -> bool {
        matches!(self, Self::ProbBp | Self::SnuBp)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stdp-unsup" => Ok(Self::StdpUnsup),
            "stdp-sup" => Ok(Self::StdpSup),
            "prob-bp" => Ok(Self::ProbBp),
            "snu-bp" => Ok(Self::SnuBp),
            "logreg" => Ok(Self::LogReg),
            _ => Err(Error::Config(format!(
                "unknown model kind `{s}` (expected stdp-unsup, stdp-sup, prob-bp, snu-bp or logreg)"
            ))),
        }
    }
}

/// Read-out used by the unsupervised STDP network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsupDecoder {
    /// Each neuron is labelled with the class it responds to most; the most
    /// active neuron decides.
    Rate,
    /// Nearest per-class mean output trace under the van Rossum metric.
    VanRossum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StdpParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub w_min: f64,
    pub w_max: f64,
    /// Excitatory neurons in the unsupervised network.
    pub n_neurons: usize,
    /// Neurons owned by each class in the supervised network.
    pub neurons_per_class: usize,
    /// Membrane potential removed from the losers when a neuron fires.
    pub inhibition: f64,
    /// Adaptive-threshold increment per output spike.
    pub theta_plus: f64,
    /// Per-step multiplicative decay of the adaptive threshold.
    pub theta_decay: f64,
    /// Total afferent weight each neuron is renormalised to after every
    /// presentation, as a fraction of the input count; 0 disables.
    pub weight_norm: f64,
    /// Upper bound of the uniform initial weights.
    pub init_max: f64,
    pub lif: LifParams,
    /// Re-presentations with doubled input gain when a test sample elicits no
    /// output spike.
    pub max_boosts: usize,
    pub decoder: UnsupDecoder,
}

impl Default for StdpParams {
    /// Settings for the supervised network.
    fn default() -> Self {
        Self {
            a_plus: 0.01,
            a_minus: 0.012,
            tau_plus: 20.0,
            tau_minus: 20.0,
            w_min: 0.0,
            w_max: 1.0,
            n_neurons: 100,
            neurons_per_class: 40,
            inhibition: 20.0,
            theta_plus: 0.0,
            theta_decay: 0.9999,
            weight_norm: 0.1,
            init_max: 0.3,
            lif: LifParams {
                threshold: 12.0,
                leak_factor: 0.95,
                refractory: 2,
                resting: 0.0,
            },
            max_boosts: 3,
            decoder: UnsupDecoder::Rate,
        }
    }
}

impl StdpParams {
    /// Settings for the unsupervised network: a lower firing threshold and a
    /// strong adaptive threshold so that no single neuron captures every input.
    pub fn unsupervised() -> Self {
        let mut p = Self::default();
        p.theta_plus = 0.5;
        p.lif.threshold = 5.0;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SrmParams {
    pub kernels: SrmKernels,
    /// Sample output spikes at evaluation instead of thresholding ρ at 0.5.
    pub sampled_decoding: bool,
}

/// How the spike nonlinearity is treated while training an SNU network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surrogate {
    /// Sigmoid outputs in the forward pass; the gradient is exact.
    Soft,
    /// Hard spikes forward, sigmoid derivative backward.
    StraightThrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnuParams {
    pub leak: f64,
    /// Initial firing threshold; biases start at its negative.
    pub threshold: f64,
    pub steepness: f64,
    pub g: StateActivation,
    pub surrogate: Surrogate,
    pub train_bias: bool,
}

impl Default for SnuParams {
    fn default() -> Self {
        Self {
            leak: 0.8,
            threshold: 1.0,
            steepness: 5.0,
            g: StateActivation::Relu,
            surrogate: Surrogate::StraightThrough,
            train_bias: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub kind: ModelKind,
    /// Hidden layer sizes; empty for a single trainable layer.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub encoding: CteConfig,
    pub targets: TargetConfig,
    pub stdp: StdpParams,
    pub srm: SrmParams,
    pub snu: SnuParams,
    pub logreg: LogRegConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::SnuBp,
            hidden: vec![100],
            learning_rate: 0.05,
            epochs: 30,
            batch_size: 32,
            seed: 11,
            encoding: CteConfig::default(),
            targets: TargetConfig::default(),
            stdp: StdpParams::default(),
            srm: SrmParams::default(),
            snu: SnuParams::default(),
            logreg: LogRegConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.kind.is_temporal() {
            if self.batch_size == 0 {
                return bad("batch_size must be at least 1");
            }
            if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
                return bad("learning_rate must be positive");
            }
            if self.targets.n_steps != self.encoding.n_steps {
                return bad("target and encoding windows differ in length");
            }
        } else if !self.hidden.is_empty() {
            return Err(Error::Config(format!("{} models have no hidden layers", self.kind)));
        }
        if self.hidden.contains(&0) {
            return bad("hidden layers must be non-empty");
        }
        if self.kind == ModelKind::SnuBp && !(0.0..1.0).contains(&self.snu.leak) {
            return bad("SNU leak must lie in [0, 1)");
        }
        if self.kind == ModelKind::SnuBp && !(self.snu.steepness > 0.0) {
            return bad("surrogate steepness must be positive");
        }
        let s = &self.stdp;
        if !self.kind.is_temporal() && (s.w_min > s.w_max || s.tau_plus <= 0.0 || s.tau_minus <= 0.0) {
            return bad("STDP needs w_min <= w_max and positive trace time constants");
        }
        Ok(())
    }

    /// Output neurons for `n_classes` classes.
    pub fn n_out(&self, n_classes: usize) -> usize {
        match self.kind {
            ModelKind::StdpUnsup => self.stdp.n_neurons,
            ModelKind::StdpSup => self.stdp.neurons_per_class * n_classes,
            ModelKind::ProbBp | ModelKind::SnuBp => self.targets.neurons_per_class * n_classes,
            ModelKind::LogReg => n_classes,
        }
    }

    /// Layer sizes from input to output.
    pub fn layer_sizes(&self, n_inputs: usize, n_classes: usize) -> Vec<usize> {
        let mut v = vec![n_inputs];
        v.extend(&self.hidden);
        v.push(self.n_out(n_classes));
        v
    }
}
