//! Trained models and their on-disk container.
//!
//! Layout: magic `SNNFCMDL`, format version (u32 LE), header length (u64 LE),
//! a JSON header with everything except weight-matrix entries, the number of
//! weight values (u64 LE), then the values as little-endian f64 in the order
//! the header lists the matrices, each row-major.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ModelKind, TrainConfig};
use super::eval::{evaluate_with, Classifier, Evaluation};
use super::{EpochLog, SnuNetwork, SrmNetwork, StdpNetwork};
use crate::baseline::LogRegModel;
use crate::dataset::{FeatureSchema, KeyValueRecord};
use crate::encoding::{CodebookSpec, CteCodebook, TargetPatternSet, TargetSpec, TemporalDecoder, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream, stream_rng};

pub const MODEL_MAGIC: &[u8; 8] = b"SNNFCMDL";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NetworkParams {
    Stdp(StdpNetwork),
    Srm(SrmNetwork),
    Snu(SnuNetwork),
    LogReg(LogRegModel),
}

impl NetworkParams {
    fn matrices_mut(&mut self) -> Vec<&mut Matrix> {
        match self {
            Self::Stdp(n) => {
                let mut v = vec![&mut n.weights];
                v.extend(n.prototypes.as_mut());
                v
            }
            Self::Srm(n) => n.layers.iter_mut().collect(),
            Self::Snu(n) => n.layers.iter_mut().map(|l| &mut l.weights).collect(),
            Self::LogReg(m) => vec![&mut m.weights],
        }
    }
}

/// Provenance recorded with every model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub config: TrainConfig,
    pub dataset: Option<String>,
    pub schema_fingerprint: String,
    pub class_names: Vec<String>,
    pub train_records_sha256: String,
    pub loss_curve: Vec<EpochLog>,
    pub test_metrics: Option<Evaluation>,
    pub crate_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub codebook: CodebookSpec,
    pub targets: Option<TargetSpec>,
    pub network: NetworkParams,
    pub manifest: TrainingManifest,
}

impl TrainedModel {
    pub fn n_classes(&self) -> usize {
        self.manifest.class_names.len()
    }

    /// Digest of the encoding (codebook spec), used to refuse evaluating a
    /// model on differently encoded data.
    pub fn encoding_hash(&self) -> String {
        encoding_hash(&self.codebook)
    }

    /// Errors unless `schema` yields the codebook this model was trained with.
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        let cards: Vec<usize> = (0..schema.n_keys()).map(|k| schema.cardinality(k)).collect();
        let expected = self.encoding_hash();
        let actual = encoding_hash(&CodebookSpec {
            cardinalities: cards,
            ..self.codebook.clone()
        });
        if expected != actual || schema.n_classes() != self.n_classes() {
            return Err(Error::EncodingMismatch { expected, actual });
        }
        Ok(())
    }

    pub fn predictor(&self) -> Result<Predictor<'_>> {
        let codebook = CteCodebook::from_spec(&self.codebook)?;
        let decoder = match &self.targets {
            Some(spec) => Some(TemporalDecoder::new(&TargetPatternSet::from_spec(spec)?, DEFAULT_TAU)),
            None => None,
        };
        if self.kind.is_temporal() && decoder.is_none() {
            return Err(Error::ModelFormat("temporal model without target patterns".into()));
        }
        Ok(Predictor {
            model: self,
            codebook,
            decoder,
        })
    }

    pub fn evaluate(&self, test: &[KeyValueRecord]) -> Result<Evaluation> {
        evaluate_with(&self.predictor()?, test)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut header = self.clone();
        let mut values = Vec::new();
        for m in header.network.matrices_mut() {
            values.extend(m.take_data());
        }
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(28 + json.len() + 8 * values.len());
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&(values.len() as u64).to_le_bytes());
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::ModelFormat("not a model file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!("unsupported model version {version}")));
        }
        let header_len = u64::from_le_bytes(read_array(&mut r)?) as usize;
        if header_len > r.len() {
            return Err(Error::ModelFormat("truncated header".into()));
        }
        let (json, rest) = r.split_at(header_len);
        let mut model: TrainedModel = serde_json::from_slice(json)?;
        r = rest;
        let n_values = u64::from_le_bytes(read_array(&mut r)?) as usize;
        if r.len() != n_values * 8 {
            return Err(Error::ModelFormat(format!(
                "expected {n_values} weight values, found {} bytes",
                r.len()
            )));
        }
        let mut values = r.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        for m in model.network.matrices_mut() {
            let len = m.rows() * m.cols();
            let data: Vec<f64> = values.by_ref().take(len).collect();
            if !m.put_data(data) {
                return Err(Error::ModelFormat("weight section shorter than the header's matrices".into()));
            }
        }
        if values.next().is_some() {
            return Err(Error::ModelFormat("trailing weight values".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::ModelFormat("truncated model file".into()))
}

fn read_array<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut a = [0u8; N];
    read_exact(r, &mut a)?;
    Ok(a)
}

pub fn encoding_hash(spec: &CodebookSpec) -> String {
    let json = serde_json::to_vec(spec).expect("codebook spec serialises");
    hex::encode(&Sha256::digest(&json)[..8])
}

/// A model with its codebook and decoder materialised.
pub struct Predictor<'a> {
    model: &'a TrainedModel,
    codebook: CteCodebook,
    decoder: Option<TemporalDecoder>,
}

impl Predictor<'_> {
    pub fn codebook(&self) -> &CteCodebook {
        &self.codebook
    }

    pub fn decoder(&self) -> Option<&TemporalDecoder> {
        self.decoder.as_ref()
    }

    /// Output spike pattern of a spiking model for one record.
    pub fn respond(&self, record: &KeyValueRecord) -> Result<crate::encoding::SpikePattern> {
        let input = self.codebook.encode(record)?;
        Ok(match &self.model.network {
            NetworkParams::Stdp(n) => n.respond(&input.active_by_step()),
            NetworkParams::Snu(n) => n.infer(&input.active_by_step()),
            NetworkParams::Srm(n) => {
                if self.model.manifest.config.srm.sampled_decoding {
                    let mut rng = stream_rng(self.model.manifest.config.seed, &[stream::SAMPLE, u64::MAX, record_key(record)]);
                    n.infer(&input, Some(&mut rng))
                } else {
                    n.infer::<rand_chacha::ChaCha8Rng>(&input, None)
                }
            }
            NetworkParams::LogReg(_) => {
                return Err(Error::Config("logistic regression has no spiking output".into()));
            }
        })
    }
}

/// Stable per-record coordinate for sampled decoding.
fn record_key(r: &KeyValueRecord) -> u64 {
    crate::rng::derive_seed(r.label as u64, &r.values.iter().map(|&v| v as u64).collect::<Vec<_>>())
}

impl Classifier for Predictor<'_> {
    fn n_classes(&self) -> usize {
        self.model.n_classes()
    }

    fn predict(&self, record: &KeyValueRecord) -> Result<usize> {
        match &self.model.network {
            NetworkParams::LogReg(m) => Ok(m.predict(&self.codebook_one_hot(record)?)),
            NetworkParams::Stdp(n) => Ok(n.predict(&self.codebook.encode(record)?.active_by_step())),
            _ => {
                let out = self.respond(record)?;
                self.decoder.as_ref().expect("checked in predictor()").decode(&out)
            }
        }
    }
}

impl Predictor<'_> {
    fn codebook_one_hot(&self, record: &KeyValueRecord) -> Result<Vec<f64>> {
        let cards = &self.model.codebook.cardinalities;
        let mut x = vec![0.0; cards.iter().sum()];
        let mut off = 0;
        for (k, (&v, &c)) in record.values.iter().zip(cards).enumerate() {
            if v >= c {
                return Err(Error::ValueOutOfRange {
                    key: k,
                    value: v,
                    cardinality: c,
                });
            }
            x[off + v] = 1.0;
            off += c;
        }
        Ok(x)
    }
}
