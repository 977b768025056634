use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::distance::{kernel_traces, trace_distance_sq};
use super::SpikePattern;
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetConfig {
    /// Output neurons owned by each class; the class target places spikes
    /// only on its own neurons.
    pub neurons_per_class: usize,
    pub spikes_per_target: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Minimum pairwise van Rossum distance between targets.
    pub separation_floor: f64,
    pub tau: f64,
    pub max_attempts: usize,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            neurons_per_class: 1,
            spikes_per_target: 4,
            n_steps: 80,
            seed: 3,
            separation_floor: 1.0,
            tau: super::DEFAULT_TAU,
            max_attempts: 64,
        }
    }
}

/// Serialised form: class count plus config; patterns are regenerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub version: u32,
    pub n_classes: usize,
    pub config: TargetConfig,
}

/// One predetermined output pattern per class.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPatternSet {
    config: TargetConfig,
    /// Derivation attempt that satisfied the separation floor.
    attempt: usize,
    patterns: Vec<SpikePattern>,
}

impl TargetPatternSet {
    pub fn generate(n_classes: usize, config: TargetConfig) -> Result<Self> {
        if n_classes == 0 || config.neurons_per_class == 0 || config.n_steps == 0 {
            return Err(Error::Config("targets need at least one class, neuron and step".into()));
        }
        if config.spikes_per_target > config.n_steps {
            return Err(Error::Config("more target spikes than timesteps".into()));
        }
        let n_out = n_classes * config.neurons_per_class;
        for attempt in 0..config.max_attempts {
            let patterns: Vec<SpikePattern> = (0..n_classes)
                .map(|c| {
                    let mut p = SpikePattern::zeros(n_out, config.n_steps);
                    for j in 0..config.neurons_per_class {
                        let n = c * config.neurons_per_class + j;
                        let mut rng = stream_rng(config.seed, &[stream::TARGETS, attempt as u64, c as u64, j as u64]);
                        for t in sample(&mut rng, config.n_steps, config.spikes_per_target) {
                            p.set(n, t, true);
                        }
                    }
                    p
                })
                .collect();
            let traces: Vec<Vec<f64>> = patterns.iter().map(|p| kernel_traces(p, config.tau)).collect();
            let separated = (0..n_classes).all(|i| {
                (i + 1..n_classes).all(|j| trace_distance_sq(&traces[i], &traces[j], config.tau).sqrt() > config.separation_floor)
            });
            if separated {
                return Ok(Self {
                    config,
                    attempt,
                    patterns,
                });
            }
        }
        Err(Error::SeparationUnreachable {
            floor: config.separation_floor,
            attempts: config.max_attempts,
        })
    }

    pub fn from_spec(spec: &TargetSpec) -> Result<Self> {
        if spec.version != 1 {
            return Err(Error::Config(format!("unsupported target-set version {}", spec.version)));
        }
        Self::generate(spec.n_classes, spec.config)
    }

    pub fn spec(&self) -> TargetSpec {
        TargetSpec {
            version: 1,
            n_classes: self.patterns.len(),
            config: self.config,
        }
    }

    pub fn config(&self) -> &TargetConfig {
        &self.config
    }

    pub fn attempt(&self) -> usize {
        self.attempt
    }

    pub fn n_classes(&self) -> usize {
        self.patterns.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_classes() * self.config.neurons_per_class
    }

    pub fn pattern(&self, class: usize) -> &SpikePattern {
        &self.patterns[class]
    }

    pub fn patterns(&self) -> &[SpikePattern] {
        &self.patterns
    }
}

/// `M` targets over `n_out` output neurons (`n_out` a multiple of `M`).
pub fn generate_targets(m: usize, n_out: usize, n_steps: usize, seed: u64) -> Result<TargetPatternSet> {
    if m == 0 || n_out == 0 || !n_out.is_multiple_of(m) {
        return Err(Error::Config(format!("{n_out} output neurons cannot be split across {m} classes")));
    }
    TargetPatternSet::generate(
        m,
        TargetConfig {
            neurons_per_class: n_out / m,
            n_steps,
            seed,
            ..Default::default()
        },
    )
}
