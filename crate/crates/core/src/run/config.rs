use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::uci::PrepareOptions;
use crate::hardware::{CrossbarConfig, NoiseModel};
use crate::learning::{ModelKind, StdpParams, TrainConfig, UnsupDecoder};
use crate::{Error, Result};

/// Everything one command needs besides its positional arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub data: DataConfig,
    pub train: TrainConfig,
    pub hardware: HardwareConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            train: preset(System::Snu { layers: 2 }),
            hardware: HardwareConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    /// Raw UCI files; falls back to the data directory lookup when unset.
    pub data_dir: Option<PathBuf>,
    pub prepare: PrepareOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardwareConfig {
    pub crossbar: CrossbarConfig,
    pub noise: NoiseModel,
    /// Noise multipliers visited by a sweep.
    pub scales: Vec<f64>,
    /// Device-noise seeds visited by a sweep.
    pub seeds: Vec<u64>,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        Self {
            crossbar: CrossbarConfig::default(),
            noise: NoiseModel::default(),
            scales: vec![0.0, 1.0, 5.0, 10.0],
            seeds: (0..5).collect(),
        }
    }
}

/// The trainable model families: three spiking systems and the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    /// One layer of LIF neurons trained with STDP.
    Stdp { supervised: bool },
    /// SRM network trained by probabilistic backpropagation.
    ProbBp { layers: usize },
    /// SNU network trained by backpropagation through time.
    Snu { layers: usize },
    LogReg,
}

impl System {
    /// Builds a system from command-line style pieces, rejecting flags that
    /// do not apply to it.
    pub fn from_parts(system: &str, layers: Option<usize>, mode: Option<&str>) -> Result<Self> {
        let s = match system {
            "1" => {
                if layers.is_some() {
                    return Err(Error::Config("system 1 is single-layer; --layers does not apply".into()));
                }
                let supervised = match mode.unwrap_or("sup") {
                    "sup" | "supervised" => true,
                    "unsup" | "unsupervised" => false,
                    m => return Err(Error::Config(format!("unknown STDP mode `{m}` (expected sup or unsup)"))),
                };
                System::Stdp { supervised }
            }
            "2" | "3" => {
                if mode.is_some() {
                    return Err(Error::Config(format!("--mode applies to system 1 only, not system {system}")));
                }
                let layers = layers.unwrap_or(2);
                if layers == 0 {
                    return Err(Error::Config("--layers must be at least 1".into()));
                }
                if system == "2" {
                    System::ProbBp { layers }
                } else {
                    System::Snu { layers }
                }
            }
            "logreg" | "baseline" => {
                if layers.is_some() || mode.is_some() {
                    return Err(Error::Config("logistic regression takes neither --layers nor --mode".into()));
                }
                System::LogReg
            }
            s => return Err(Error::Config(format!("unknown system `{s}` (expected 1, 2, 3 or logreg)"))),
        };
        Ok(s)
    }

    pub fn kind(self) -> ModelKind {
        match self {
            System::Stdp { supervised: true } => ModelKind::StdpSup,
            System::Stdp { supervised: false } => ModelKind::StdpUnsup,
            System::ProbBp { .. } => ModelKind::ProbBp,
            System::Snu { .. } => ModelKind::SnuBp,
            System::LogReg => ModelKind::LogReg,
        }
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_parts(s, None, None)
    }
}

/// Default training configuration for each system.
pub fn preset(system: System) -> TrainConfig {
    let base = TrainConfig::default();
    match system {
        System::Stdp { supervised } => TrainConfig {
            kind: system.kind(),
            hidden: vec![],
            epochs: if supervised { 3 } else { 1 },
            stdp: if supervised { StdpParams::default() } else { StdpParams::unsupervised() },
            ..base
        },
        System::ProbBp { layers } => TrainConfig {
            kind: ModelKind::ProbBp,
            hidden: vec![50; layers - 1],
            learning_rate: 0.05,
            epochs: 60,
            ..base
        },
        System::Snu { layers } => TrainConfig {
            kind: ModelKind::SnuBp,
            hidden: vec![200; layers - 1],
            learning_rate: 0.05,
            epochs: 150,
            ..base
        },
        System::LogReg => TrainConfig {
            kind: ModelKind::LogReg,
            hidden: vec![],
            ..base
        },
    }
}

/// Short name used in result tables, e.g. `snu-bp-2l` or `stdp-unsup-rate`.
pub fn model_label(cfg: &TrainConfig) -> String {
    match cfg.kind {
        ModelKind::ProbBp | ModelKind::SnuBp => format!("{}-{}l", cfg.kind, cfg.hidden.len() + 1),
        ModelKind::StdpUnsup => match cfg.stdp.decoder {
            UnsupDecoder::Rate => "stdp-unsup-rate".into(),
            UnsupDecoder::VanRossum => "stdp-unsup-van-rossum".into(),
        },
        k => k.to_string(),
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            System::Stdp { supervised: true } => f.write_str("system 1 (supervised STDP)"),
            System::Stdp { supervised: false } => f.write_str("system 1 (unsupervised STDP)"),
            System::ProbBp { layers } => write!(f, "system 2 ({layers} layer)"),
            System::Snu { layers } => write!(f, "system 3 ({layers} layer)"),
            System::LogReg => f.write_str("logistic regression"),
        }
    }
}

/// Builds a run configuration in layers: defaults (or a system preset),
/// then a config file, then `key.path=value` overrides.
///
/// The file may be TOML or a JSON run manifest, whose recorded configuration
/// is replayed.
pub fn layered_config(system: Option<System>, file: Option<&Path>, sets: &[String]) -> Result<RunConfig> {
    let mut base = RunConfig::default();
    if let Some(s) = system {
        base.train = preset(s);
    }
    let mut value = toml::Value::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let overlay = if path.extension().is_some_and(|e| e == "json") {
            let m: super::RunManifest = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            toml::Value::try_from(&m.config).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str::<toml::Value>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        merge(&mut value, overlay);
    }
    for s in sets {
        let (key, raw) = s.split_once('=').ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
        set_path(&mut value, key.trim(), parse_scalar(raw.trim()))?;
    }
    let cfg: RunConfig = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if let Some(s) = system {
        if cfg.train.kind != s.kind() {
            return Err(Error::Config(format!("{s} conflicts with train.kind = {} from the configuration", cfg.train.kind)));
        }
    }
    cfg.train.validate()?;
    Ok(cfg)
}

fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(root: &mut toml::Value, key: &str, v: toml::Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, p) in parts.iter().enumerate() {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{}` is not a table", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            table.insert(p.to_string(), v);
            return Ok(());
        }
        cur = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    Err(Error::Config("empty override key".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for s in [
            System::Stdp { supervised: true },
            System::Stdp { supervised: false },
            System::ProbBp { layers: 1 },
            System::ProbBp { layers: 2 },
            System::Snu { layers: 2 },
            System::LogReg,
        ] {
            preset(s).validate().unwrap();
            assert_eq!(preset(s).kind, s.kind());
        }
        assert_eq!(preset(System::Snu { layers: 3 }).hidden, vec![200, 200]);
    }

    #[test]
    fn misplaced_flags_are_rejected() {
        assert!(System::from_parts("1", Some(2), None).is_err());
        assert!(System::from_parts("3", None, Some("unsup")).is_err());
        assert!(System::from_parts("logreg", Some(1), None).is_err());
        assert!(System::from_parts("4", None, None).is_err());
        assert_eq!(System::from_parts("1", None, Some("unsup")).unwrap(), System::Stdp { supervised: false });
    }

    #[test]
    fn overrides_apply_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("run.toml");
        std::fs::write(&f, "[train]\nepochs = 7\nhidden = [20]\n[hardware]\nseeds = [1, 2]\n").unwrap();
        let cfg = layered_config(Some(System::Snu { layers: 2 }), Some(&f), &["train.epochs=9".into(), "train.snu.leak=0.7".into()]).unwrap();
        assert_eq!(cfg.train.epochs, 9);
        assert_eq!(cfg.train.hidden, vec![20]);
        assert_eq!(cfg.train.snu.leak, 0.7);
        assert_eq!(cfg.hardware.seeds, vec![1, 2]);
        assert_eq!(cfg.train.learning_rate, 0.05);
    }

    #[test]
    fn file_kind_must_agree_with_system() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("run.toml");
        std::fs::write(&f, "[train]\nkind = \"logreg\"\nhidden = []\n").unwrap();
        assert!(matches!(layered_config(Some(System::Snu { layers: 2 }), Some(&f), &[]), Err(Error::Config(_))));
        assert_eq!(layered_config(None, Some(&f), &[]).unwrap().train.kind, ModelKind::LogReg);
    }

    #[test]
    fn bad_override_is_a_usage_error() {
        assert!(matches!(layered_config(None, None, &["train.epochs".into()]), Err(Error::Config(_))));
        assert!(matches!(layered_config(None, None, &["train.epochs=\"x\"".into()]), Err(Error::Config(_))));
    }
}
