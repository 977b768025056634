//! Key-value records, UCI ingestion, numeric binning, one-hot vectors and
//! deterministic train/test splits.

mod load;
mod schema;
mod split;
pub mod uci;

pub use load::{load_uci_csv, load_uci_csv_with_report, RawTable};
pub use schema::{bin_numeric, FeatureSchema, KeyKind, KeySpec, MISSING};
pub use split::{split, split_indices};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One file's metadata: one discrete value identifier per schema key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyValueRecord {
    pub values: Vec<usize>,
    pub label: usize,
}

impl KeyValueRecord {
    pub fn new(values: Vec<usize>, label: usize) -> Self {
        Self { values, label }
    }

    /// Number of keys on which the two records carry the same value.
    pub fn shared_pairs(&self, other: &KeyValueRecord) -> usize {
        self.values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a == b)
            .count()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub records: Vec<KeyValueRecord>,
    pub split_seed: u64,
    pub train_fraction: f64,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, records: Vec<KeyValueRecord>) -> Self {
        Self {
            schema,
            records,
            split_seed: 0,
            train_fraction: 0.8,
        }
    }

    pub fn with_split(mut self, seed: u64, train_fraction: f64) -> Self {
        self.split_seed = seed;
        self.train_fraction = train_fraction;
        self
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.records, self.schema.n_classes())
    }
}

pub fn class_counts(records: &[KeyValueRecord], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for r in records {
        counts[r.label] += 1;
    }
    counts
}

/// Frequency of the most common class.
pub fn majority_fraction(records: &[KeyValueRecord], n_classes: usize) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let counts = class_counts(records, n_classes);
    *counts.iter().max().unwrap() as f64 / records.len() as f64
}

/// One-hot feature vector: one block per key, one slot per enumerated value.
pub fn one_hot(record: &KeyValueRecord, schema: &FeatureSchema) -> Vec<f64> {
    let mut out = vec![0.0; schema.one_hot_dim()];
    let mut offset = 0;
    for (k, &v) in record.values.iter().enumerate() {
        out[offset + v] = 1.0;
        offset += schema.cardinality(k);
    }
    out
}

/// SHA-256 over the canonical byte form of a record list.
pub fn records_hash(records: &[KeyValueRecord]) -> String {
    let mut h = Sha256::new();
    for r in records {
        h.update((r.values.len() as u64).to_le_bytes());
        for &v in &r.values {
            h.update((v as u64).to_le_bytes());
        }
        h.update((r.label as u64).to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_2_3() -> FeatureSchema {
        FeatureSchema::new(
            vec![
                KeySpec::categorical("a", ["a0", MISSING]),
                KeySpec::categorical("b", ["b0", "b1", MISSING]),
            ],
            vec!["x".into(), "y".into()],
        )
        .unwrap()
    }

    #[test]
    fn one_hot_two_keys() {
        let s = schema_2_3();
        let r = KeyValueRecord::new(vec![1, 0], 0);
        assert_eq!(one_hot(&r, &s), vec![0.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn one_hot_identity_case() {
        let s = FeatureSchema::new(
            vec![KeySpec::categorical("only", [MISSING])],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        assert_eq!(one_hot(&KeyValueRecord::new(vec![0], 1), &s), vec![1.0]);
    }

    #[test]
    fn one_hot_sums_to_key_count() {
        let s = schema_2_3();
        for a in 0..2 {
            for b in 0..3 {
                let v = one_hot(&KeyValueRecord::new(vec![a, b], 0), &s);
                assert_eq!(v.iter().sum::<f64>(), 2.0);
            }
        }
    }

    #[test]
    fn one_hot_dot_counts_shared_pairs() {
        let s = schema_2_3();
        let r = KeyValueRecord::new(vec![1, 2], 0);
        for a in 0..2 {
            for b in 0..3 {
                let q = KeyValueRecord::new(vec![a, b], 1);
                let dot: f64 = one_hot(&r, &s)
                    .iter()
                    .zip(one_hot(&q, &s))
                    .map(|(x, y)| x * y)
                    .sum();
                assert_eq!(dot as usize, r.shared_pairs(&q));
            }
        }
    }

    #[test]
    fn majority() {
        let recs: Vec<_> = [0, 0, 1, 2].iter().map(|&l| KeyValueRecord::new(vec![], l)).collect();
        assert_eq!(majority_fraction(&recs, 3), 0.5);
    }
}
