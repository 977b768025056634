use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SpikePattern;
use crate::dataset::{FeatureSchema, KeyValueRecord};
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CteConfig {
    /// Input neurons dedicated to each key.
    pub n_per_key: usize,
    /// Timesteps per presentation window.
    pub n_steps: usize,
    /// Expected spikes per neuron over the window.
    pub spike_rate: f64,
    pub master_seed: u64,
}

impl Default for CteConfig {
    fn default() -> Self {
        Self {
            n_per_key: 20,
            n_steps: 80,
            spike_rate: 4.0,
            master_seed: 1,
        }
    }
}

impl CteConfig {
    fn validate(&self) -> Result<()> {
        if self.n_per_key == 0 || self.n_steps == 0 {
            return Err(Error::Config("n_per_key and n_steps must be at least 1".into()));
        }
        if !(self.spike_rate > 0.0 && self.spike_rate <= self.n_steps as f64) {
            return Err(Error::Config(format!(
                "spike_rate {} must lie in (0, n_steps]",
                self.spike_rate
            )));
        }
        Ok(())
    }
}

/// Serialised form of a codebook: configuration and value-set sizes only.
/// Patterns are regenerated from the seed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookSpec {
    pub version: u32,
    pub config: CteConfig,
    pub cardinalities: Vec<usize>,
}

/// Key → neuron group and (key, value) → fixed pseudo-random sub-pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CteCodebook {
    config: CteConfig,
    cardinalities: Vec<usize>,
    // [key][value] -> n_per_key × n_steps bits, row-major by neuron
    sub_patterns: Vec<Vec<Vec<u8>>>,
}

/// Builds the codebook for `schema`. Sub-pattern bits are drawn per
/// (key, value, neuron) stream, each step spiking with probability
/// `spike_rate / n_steps`.
pub fn build_codebook(schema: &FeatureSchema, config: CteConfig) -> Result<CteCodebook> {
    let cards = (0..schema.n_keys()).map(|k| schema.cardinality(k)).collect();
    CteCodebook::from_cardinalities(cards, config)
}

impl CteCodebook {
    pub fn from_cardinalities(cardinalities: Vec<usize>, config: CteConfig) -> Result<Self> {
        config.validate()?;
        let p = config.spike_rate / config.n_steps as f64;
        let sub_patterns = cardinalities
            .iter()
            .enumerate()
            .map(|(k, &card)| {
                (0..card)
                    .map(|v| {
                        let mut bits = Vec::with_capacity(config.n_per_key * config.n_steps);
                        for j in 0..config.n_per_key {
                            let mut rng = stream_rng(config.master_seed, &[stream::CTE, k as u64, v as u64, j as u64]);
                            bits.extend((0..config.n_steps).map(|_| (rng.random::<f64>() < p) as u8));
                        }
                        bits
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            config,
            cardinalities,
            sub_patterns,
        })
    }

    pub fn from_spec(spec: &CodebookSpec) -> Result<Self> {
        if spec.version != 1 {
            return Err(Error::Config(format!("unsupported codebook version {}", spec.version)));
        }
        Self::from_cardinalities(spec.cardinalities.clone(), spec.config)
    }

    pub fn spec(&self) -> CodebookSpec {
        CodebookSpec {
            version: 1,
            config: self.config,
            cardinalities: self.cardinalities.clone(),
        }
    }

    pub fn config(&self) -> &CteConfig {
        &self.config
    }

    pub fn n_keys(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_keys() * self.config.n_per_key
    }

    pub fn n_steps(&self) -> usize {
        self.config.n_steps
    }

    /// Input neuron indices owned by `key`.
    pub fn neuron_group(&self, key: usize) -> std::ops::Range<usize> {
        key * self.config.n_per_key..(key + 1) * self.config.n_per_key
    }

    /// The fixed sub-pattern of a key-value pair.
    pub fn sub_pattern(&self, key: usize, value: usize) -> SpikePattern {
        SpikePattern::from_bits(self.config.n_per_key, self.config.n_steps, self.sub_patterns[key][value].clone())
            .expect("codebook bits are well formed")
    }

    pub fn encode(&self, record: &KeyValueRecord) -> Result<SpikePattern> {
        if record.values.len() != self.n_keys() {
            return Err(Error::Shape(format!(
                "record has {} values, codebook has {} keys",
                record.values.len(),
                self.n_keys()
            )));
        }
        let (npk, t) = (self.config.n_per_key, self.config.n_steps);
        let mut out = SpikePattern::zeros(self.n_inputs(), t);
        for (k, &v) in record.values.iter().enumerate() {
            if v >= self.cardinalities[k] {
                return Err(Error::ValueOutOfRange {
                    key: k,
                    value: v,
                    cardinality: self.cardinalities[k],
                });
            }
            let bits = &self.sub_patterns[k][v];
            for j in 0..npk {
                out.neuron_mut(k * npk + j).copy_from_slice(&bits[j * t..(j + 1) * t]);
            }
        }
        Ok(out)
    }
}

pub fn encode_record(record: &KeyValueRecord, codebook: &CteCodebook) -> Result<SpikePattern> {
    codebook.encode(record)
}
