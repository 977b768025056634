//! The four UCI tasks: schemas, file layout, pinned checksums and the split
//! protocol (official files for Adult, stratified 80/20 elsewhere).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{load_uci_csv_with_report, records_hash, split_indices, FeatureSchema, KeySpec, KeyValueRecord, RawTable};
use crate::error::{Error, Result};

/// Environment variable naming the directory holding the raw UCI files.
pub const DATA_DIR_ENV: &str = "SNNFC_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Adult,
    Nursery,
    Car,
    Connect4,
}

impl DatasetName {
    pub const ALL: [DatasetName; 4] = [Self::Adult, Self::Nursery, Self::Car, Self::Connect4];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Adult => "adult",
            Self::Nursery => "nursery",
            Self::Car => "car",
            Self::Connect4 => "connect4",
        }
    }

    /// Raw files: the training file first, then the official test file when
    /// the dataset ships one.
    pub fn files(self) -> &'static [&'static str] {
        match self {
            Self::Adult => &["adult.data", "adult.test"],
            Self::Nursery => &["nursery.data"],
            Self::Car => &["car.data"],
            Self::Connect4 => &["connect-4.data"],
        }
    }

    pub fn source_url(self) -> &'static str {
        match self {
            Self::Adult => "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/",
            Self::Nursery => "https://archive.ics.uci.edu/ml/machine-learning-databases/nursery/",
            Self::Car => "https://archive.ics.uci.edu/ml/machine-learning-databases/car/",
            Self::Connect4 => "https://archive.ics.uci.edu/ml/machine-learning-databases/connect-4/",
        }
    }

    /// Known-good SHA-256 digests per file. An empty list means no digest
    /// is pinned and verification is skipped.
    pub fn pinned_sha256(self, file: &str) -> &'static [&'static str] {
        match (self, file) {
            (Self::Car, "car.data") => &["b703a9ac69f11e64ce8c223c0a40de4d2e9d769f7fb20be5f8f2e8a619893d83"],
            (Self::Adult, "adult.data") => &["5b00264637dbfec36bdeaab5676b0b309ff9eb788d63554ca0a249491c86603d"],
            (Self::Adult, "adult.test") => &["a2a9044bc167a35b2361efbabec64e89d69ce82d9790d2980119aac5fd7e9c05"],
            _ => &[],
        }
    }

    pub fn has_official_split(self) -> bool {
        matches!(self, Self::Adult)
    }

    /// Schema with enumerated value sets. Adult's numeric keys come back
    /// without bin edges; [`prepare`] fits them on the training file.
    pub fn schema(self) -> FeatureSchema {
        let (keys, classes): (Vec<KeySpec>, &[&str]) = match self {
            Self::Car => {
                let price = ["vhigh", "high", "med", "low"];
                (
                    vec![
                        KeySpec::categorical("buying", price),
                        KeySpec::categorical("maint", price),
                        KeySpec::categorical("doors", ["2", "3", "4", "5more"]),
                        KeySpec::categorical("persons", ["2", "4", "more"]),
                        KeySpec::categorical("lug_boot", ["small", "med", "big"]),
                        KeySpec::categorical("safety", ["low", "med", "high"]),
                    ],
                    &["unacc", "acc", "good", "vgood"],
                )
            }
            Self::Nursery => (
                vec![
                    KeySpec::categorical("parents", ["usual", "pretentious", "great_pret"]),
                    KeySpec::categorical("has_nurs", ["proper", "less_proper", "improper", "critical", "very_crit"]),
                    KeySpec::categorical("form", ["complete", "completed", "incomplete", "foster"]),
                    KeySpec::categorical("children", ["1", "2", "3", "more"]),
                    KeySpec::categorical("housing", ["convenient", "less_conv", "critical"]),
                    KeySpec::categorical("finance", ["convenient", "inconv"]),
                    KeySpec::categorical("social", ["nonprob", "slightly_prob", "problematic"]),
                    KeySpec::categorical("health", ["recommended", "priority", "not_recom"]),
                ],
                &["not_recom", "recommend", "very_recom", "priority", "spec_prior"],
            ),
            Self::Connect4 => {
                let mut keys = Vec::with_capacity(42);
                for col in ['a', 'b', 'c', 'd', 'e', 'f', 'g'] {
                    for row in 1..=6 {
                        keys.push(KeySpec::categorical(&format!("{col}{row}"), ["x", "o", "b"]));
                    }
                }
                (keys, &["win", "loss", "draw"])
            }
            Self::Adult => (
                vec![
                    KeySpec::numeric("age", vec![]),
                    KeySpec::categorical(
                        "workclass",
                        ["Private", "Self-emp-not-inc", "Self-emp-inc", "Federal-gov", "Local-gov", "State-gov", "Without-pay", "Never-worked"],
                    ),
                    KeySpec::numeric("fnlwgt", vec![]),
                    KeySpec::categorical(
                        "education",
                        [
                            "Bachelors", "Some-college", "11th", "HS-grad", "Prof-school", "Assoc-acdm", "Assoc-voc", "9th",
                            "7th-8th", "12th", "Masters", "1st-4th", "10th", "Doctorate", "5th-6th", "Preschool",
                        ],
                    ),
                    KeySpec::numeric("education-num", vec![]),
                    KeySpec::categorical(
                        "marital-status",
                        [
                            "Married-civ-spouse", "Divorced", "Never-married", "Separated", "Widowed",
                            "Married-spouse-absent", "Married-AF-spouse",
                        ],
                    ),
                    KeySpec::categorical(
                        "occupation",
                        [
                            "Tech-support", "Craft-repair", "Other-service", "Sales", "Exec-managerial", "Prof-specialty",
                            "Handlers-cleaners", "Machine-op-inspct", "Adm-clerical", "Farming-fishing", "Transport-moving",
                            "Priv-house-serv", "Protective-serv", "Armed-Forces",
                        ],
                    ),
                    KeySpec::categorical(
                        "relationship",
                        ["Wife", "Own-child", "Husband", "Not-in-family", "Other-relative", "Unmarried"],
                    ),
                    KeySpec::categorical("race", ["White", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other", "Black"]),
                    KeySpec::categorical("sex", ["Female", "Male"]),
                    KeySpec::numeric("capital-gain", vec![]),
                    KeySpec::numeric("capital-loss", vec![]),
                    KeySpec::numeric("hours-per-week", vec![]),
                    KeySpec::categorical(
                        "native-country",
                        [
                            "United-States", "Cambodia", "England", "Puerto-Rico", "Canada", "Germany",
                            "Outlying-US(Guam-USVI-etc)", "India", "Japan", "Greece", "South", "China", "Cuba", "Iran",
                            "Honduras", "Philippines", "Italy", "Poland", "Jamaica", "Vietnam", "Mexico", "Portugal",
                            "Ireland", "France", "Dominican-Republic", "Laos", "Ecuador", "Taiwan", "Haiti", "Columbia",
                            "Hungary", "Guatemala", "Nicaragua", "Scotland", "Thailand", "Yugoslavia", "El-Salvador",
                            "Trinadad&Tobago", "Peru", "Hong", "Holand-Netherlands",
                        ],
                    ),
                ],
                &["<=50K", ">50K"],
            ),
        };
        FeatureSchema::new(keys, classes.iter().map(|c| c.to_string()).collect()).expect("static schema is valid")
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adult" => Ok(Self::Adult),
            "nursery" => Ok(Self::Nursery),
            "car" => Ok(Self::Car),
            "connect4" | "connect-4" => Ok(Self::Connect4),
            _ => Err(Error::UnknownDataset(s.to_string())),
        }
    }
}

/// Directory holding the raw files: `$SNNFC_DATA_DIR` if set, otherwise the
/// repository's vendored `data/uci`, otherwise `./data/uci`.
pub fn default_data_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(d);
    }
    let vendored = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/uci");
    if vendored.is_dir() {
        return vendored;
    }
    PathBuf::from("data/uci")
}

/// True when every raw file of `name` is present in `dir`.
pub fn available(name: DatasetName, dir: &Path) -> bool {
    name.files().iter().all(|f| dir.join(f).is_file())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitProtocol {
    Official { train_file: String, test_file: String },
    Stratified { seed: u64, train_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepareOptions {
    pub seed: u64,
    pub train_fraction: f64,
    pub numeric_bins: usize,
    /// Reject files whose digest differs from a pinned one.
    pub verify_checksums: bool,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            train_fraction: 0.8,
            numeric_bins: 8,
            verify_checksums: true,
        }
    }
}

/// A schema-resolved, split dataset ready for training.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub name: DatasetName,
    pub schema: FeatureSchema,
    pub records: Vec<KeyValueRecord>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub protocol: SplitProtocol,
    pub unknown_tokens: usize,
    pub file_sha256: BTreeMap<String, String>,
}

impl PreparedDataset {
    pub fn train_records(&self) -> Vec<KeyValueRecord> {
        self.train.iter().map(|&i| self.records[i].clone()).collect()
    }

    pub fn test_records(&self) -> Vec<KeyValueRecord> {
        self.test.iter().map(|&i| self.records[i].clone()).collect()
    }

    pub fn manifest(&self) -> DatasetManifest {
        DatasetManifest {
            name: self.name,
            schema: self.schema.clone(),
            protocol: self.protocol.clone(),
            n_records: self.records.len(),
            n_train: self.train.len(),
            n_test: self.test.len(),
            train_hash: records_hash(&self.train_records()),
            test_hash: records_hash(&self.test_records()),
            unknown_tokens: self.unknown_tokens,
            file_sha256: self.file_sha256.clone(),
            schema_fingerprint: self.schema.fingerprint(),
        }
    }
}

/// Everything needed to reproduce a prepared dataset bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: DatasetName,
    pub schema: FeatureSchema,
    pub protocol: SplitProtocol,
    pub n_records: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train_hash: String,
    pub test_hash: String,
    pub unknown_tokens: usize,
    pub file_sha256: BTreeMap<String, String>,
    pub schema_fingerprint: String,
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Loads, bins and splits one of the four datasets from `dir`.
pub fn prepare(name: DatasetName, dir: &Path, opts: &PrepareOptions) -> Result<PreparedDataset> {
    let mut digests = BTreeMap::new();
    for f in name.files() {
        let path = dir.join(f);
        if !path.is_file() {
            return Err(Error::io(
                &path,
                std::io::Error::new(std::io::ErrorKind::NotFound, format!("missing raw file (source: {})", name.source_url())),
            ));
        }
        let actual = file_sha256(&path)?;
        let pinned = name.pinned_sha256(f);
        if opts.verify_checksums && !pinned.is_empty() && !pinned.contains(&actual.as_str()) {
            return Err(Error::Checksum {
                path,
                expected: pinned[0].to_string(),
                actual,
            });
        }
        if pinned.is_empty() {
            log::warn!("{f}: no pinned checksum, accepting sha256 {actual}");
        }
        digests.insert(f.to_string(), actual);
    }

    let mut schema = name.schema();
    let train_path = dir.join(name.files()[0]);
    let k = schema.n_keys();
    if schema.keys().iter().any(|s| matches!(s.kind, super::KeyKind::Numeric { .. })) {
        let raw = RawTable::read(&train_path, k + 1)?;
        schema.fit_numeric_bins(&raw.features(), opts.numeric_bins)?;
    }

    let (train_ds, rep) = load_uci_csv_with_report(&train_path, &schema)?;
    let mut unknown = rep.unknown_tokens;
    let (records, train, test, protocol) = if name.has_official_split() {
        let (test_ds, rep) = load_uci_csv_with_report(&dir.join(name.files()[1]), &schema)?;
        unknown += rep.unknown_tokens;
        let n_tr = train_ds.records.len();
        let n_te = test_ds.records.len();
        let mut records = train_ds.records;
        records.extend(test_ds.records);
        (
            records,
            (0..n_tr).collect(),
            (n_tr..n_tr + n_te).collect(),
            SplitProtocol::Official {
                train_file: name.files()[0].into(),
                test_file: name.files()[1].into(),
            },
        )
    } else {
        let labels: Vec<usize> = train_ds.records.iter().map(|r| r.label).collect();
        let (tr, te) = split_indices(&labels, schema.n_classes(), opts.seed, opts.train_fraction)?;
        (
            train_ds.records,
            tr,
            te,
            SplitProtocol::Stratified {
                seed: opts.seed,
                train_fraction: opts.train_fraction,
            },
        )
    };
    Ok(PreparedDataset {
        name,
        schema,
        records,
        train,
        test,
        protocol,
        unknown_tokens: unknown,
        file_sha256: digests,
    })
}
