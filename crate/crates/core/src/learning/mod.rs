//! Training: pair-based STDP on LIF neurons, probabilistic backpropagation on
//! SRM neurons, BPTT on SNU networks, plus evaluation and the model file.

mod config;
mod eval;
mod model;
mod prob_bp;
mod snu_bptt;
mod stdp;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use config::{ModelKind, SnuParams, SrmParams, StdpParams, Surrogate, TrainConfig, UnsupDecoder};
pub use eval::{evaluate_with, Classifier, ConfusionMatrix, Evaluation};
pub use model::{encoding_hash, NetworkParams, Predictor, TrainedModel, TrainingManifest, MODEL_MAGIC, MODEL_VERSION};
pub use prob_bp::{prob_bp_train, SrmNetwork};
pub use snu_bptt::{snu_bpt_train, DriveFn, Grads, SnuNetwork};
pub use stdp::{stdp_train, StdpNetwork};

use crate::baseline::logreg_train;
use crate::dataset::{one_hot, records_hash, FeatureSchema, KeyValueRecord};
use crate::encoding::{build_codebook, TargetPatternSet};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::rng::{stream, stream_rng};

/// Mean training loss (or, for STDP, mean output spikes per sample) after
/// an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
}

/// `rows × cols` weights uniform in `±1/√cols`, one stream per layer.
pub(crate) fn init_uniform(rows: usize, cols: usize, seed: u64, layer: u64) -> Matrix {
    let a = 1.0 / (cols.max(1) as f64).sqrt();
    let mut rng = stream_rng(seed, &[stream::INIT, layer]);
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-a..a))
}

/// Trains the model selected by `cfg.kind` on `train`.
pub fn train(train: &[KeyValueRecord], schema: &FeatureSchema, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    let codebook = build_codebook(schema, cfg.encoding)?;
    let m = schema.n_classes();
    let mut targets = None;
    let (network, curve) = match cfg.kind {
        ModelKind::StdpUnsup | ModelKind::StdpSup => {
            let (net, log) = stdp_train(train, m, &codebook, cfg)?;
            (NetworkParams::Stdp(net), log)
        }
        ModelKind::ProbBp | ModelKind::SnuBp => {
            let t = TargetPatternSet::generate(m, cfg.targets)?;
            let res = if cfg.kind == ModelKind::ProbBp {
                let (net, log) = prob_bp_train(train, &codebook, &t, cfg)?;
                (NetworkParams::Srm(net), log)
            } else {
                let (net, log) = snu_bpt_train(train, &codebook, &t, cfg)?;
                (NetworkParams::Snu(net), log)
            };
            targets = Some(t.spec());
            res
        }
        ModelKind::LogReg => {
            let xs: Vec<Vec<f64>> = train.iter().map(|r| one_hot(r, schema)).collect();
            let ys: Vec<usize> = train.iter().map(|r| r.label).collect();
            let (model, curve) = logreg_train(&xs, &ys, m, &cfg.logreg)?;
            let log = curve.into_iter().enumerate().map(|(epoch, loss)| EpochLog { epoch, loss }).collect();
            (NetworkParams::LogReg(model), log)
        }
    };
    Ok(TrainedModel {
        kind: cfg.kind,
        codebook: codebook.spec(),
        targets,
        network,
        manifest: TrainingManifest {
            config: cfg.clone(),
            dataset: None,
            schema_fingerprint: schema.fingerprint(),
            class_names: schema.class_names().to_vec(),
            train_records_sha256: records_hash(train),
            loss_curve: curve,
            test_metrics: None,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}
