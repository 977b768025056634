use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token standing for an absent or unrecognised value.
pub const MISSING: &str = "?";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KeyKind {
    /// Enumerated values; always contains [`MISSING`].
    Categorical { values: Vec<String> },
    /// Real-valued field mapped to `edges.len() + 1` bins plus a trailing
    /// missing slot.
    Numeric { edges: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeySpec {
    pub name: String,
    pub kind: KeyKind,
}

impl KeySpec {
    pub fn categorical<S: Into<String>>(name: &str, values: impl IntoIterator<Item = S>) -> Self {
        let mut values: Vec<String> = values.into_iter().map(Into::into).collect();
        if !values.iter().any(|v| v == MISSING) {
            values.push(MISSING.to_string());
        }
        Self {
            name: name.to_string(),
            kind: KeyKind::Categorical { values },
        }
    }

    pub fn numeric(name: &str, edges: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            kind: KeyKind::Numeric { edges },
        }
    }

    pub fn cardinality(&self) -> usize {
        match &self.kind {
            KeyKind::Categorical { values } => values.len(),
            KeyKind::Numeric { edges } => edges.len() + 2,
        }
    }

    pub fn missing_id(&self) -> usize {
        match &self.kind {
            KeyKind::Categorical { values } => {
                values.iter().position(|v| v == MISSING).expect("missing value present")
            }
            KeyKind::Numeric { edges } => edges.len() + 1,
        }
    }

    /// Maps a raw token to a value identifier. `Ok(None)` means the token is
    /// not in the enumerated set (caller substitutes the missing id).
    pub fn value_id(&self, token: &str) -> Result<Option<usize>> {
        match &self.kind {
            KeyKind::Categorical { values } => Ok(values.iter().position(|v| v == token)),
            KeyKind::Numeric { edges } => {
                if token == MISSING {
                    return Ok(Some(self.missing_id()));
                }
                let x: f64 = token.parse().map_err(|_| {
                    Error::Schema(format!("key `{}`: `{token}` is not a number", self.name))
                })?;
                if edges.is_empty() {
                    return if x.is_nan() { Err(Error::NanValue) } else { Ok(Some(0)) };
                }
                bin_numeric(x, edges).map(Some)
            }
        }
    }
}

/// Ordered keys plus the class labels of a classification task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    keys: Vec<KeySpec>,
    class_names: Vec<String>,
}

impl FeatureSchema {
    pub fn new(keys: Vec<KeySpec>, class_names: Vec<String>) -> Result<Self> {
        let s = Self { keys, class_names };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.class_names.len() < 2 {
            return Err(Error::Schema("need at least two classes".into()));
        }
        for (i, k) in self.keys.iter().enumerate() {
            if self.keys[..i].iter().any(|o| o.name == k.name) {
                return Err(Error::Schema(format!("duplicate key `{}`", k.name)));
            }
            match &k.kind {
                KeyKind::Categorical { values } => {
                    if !values.iter().any(|v| v == MISSING) {
                        return Err(Error::Schema(format!("key `{}` lacks a missing value", k.name)));
                    }
                }
                KeyKind::Numeric { edges } => {
                    if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
                        return Err(Error::Schema(format!(
                            "key `{}`: bin edges must be finite and strictly increasing",
                            k.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn keys(&self) -> &[KeySpec] {
        &self.keys
    }

    pub fn n_keys(&self) -> usize {
        self.keys.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_id(&self, token: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == token)
    }

    pub fn cardinality(&self, key: usize) -> usize {
        self.keys[key].cardinality()
    }

    pub fn one_hot_dim(&self) -> usize {
        self.keys.iter().map(KeySpec::cardinality).sum()
    }

    pub fn set_edges(&mut self, key: usize, edges: Vec<f64>) -> Result<()> {
        match &mut self.keys[key].kind {
            KeyKind::Numeric { edges: e } => *e = edges,
            KeyKind::Categorical { .. } => {
                return Err(Error::Schema(format!("key `{}` is categorical", self.keys[key].name)))
            }
        }
        self.validate()
    }

    /// Fits quantile bin edges for every numeric key from the given raw rows
    /// (`n_bins` target bins per key; see [`quantile_edges`]).
    pub fn fit_numeric_bins(&mut self, rows: &[Vec<String>], n_bins: usize) -> Result<()> {
        for k in 0..self.keys.len() {
            if !matches!(self.keys[k].kind, KeyKind::Numeric { .. }) {
                continue;
            }
            let mut xs = Vec::with_capacity(rows.len());
            for r in rows {
                let tok = r[k].as_str();
                if tok == MISSING {
                    continue;
                }
                let x: f64 = tok.parse().map_err(|_| {
                    Error::Schema(format!("key `{}`: `{tok}` is not a number", self.keys[k].name))
                })?;
                if x.is_nan() {
                    return Err(Error::NanValue);
                }
                xs.push(x);
            }
            self.set_edges(k, quantile_edges(&mut xs, n_bins))?;
        }
        Ok(())
    }

    /// Short stable digest of the schema, used to tie models to datasets.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("schema serialises");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

/// Bin index of `value`: bin `i` is `[edges[i-1], edges[i])`, with everything
/// below the first edge in bin 0 and everything at or above the last edge in
/// bin `edges.len()`.
pub fn bin_numeric(value: f64, edges: &[f64]) -> Result<usize> {
    if value.is_nan() {
        return Err(Error::NanValue);
    }
    debug_assert!(!edges.is_empty());
    Ok(edges.partition_point(|&e| e <= value))
}

/// Quantile edges taken from the observed values themselves, deduplicated.
/// Every resulting bin is non-empty on the fitting data. When the quantiles
/// all collapse onto the minimum (heavily zero-inflated fields) a single edge
/// at the smallest value above the minimum is used instead.
pub fn quantile_edges(xs: &mut [f64], n_bins: usize) -> Vec<f64> {
    if xs.is_empty() || n_bins < 2 {
        return Vec::new();
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    let min = xs[0];
    let mut edges: Vec<f64> = Vec::new();
    for i in 1..n_bins {
        let idx = ((i * n) as f64 / n_bins as f64).round() as usize;
        let c = xs[idx.min(n - 1)];
        if c > min && edges.last().is_none_or(|&e| c > e) {
            edges.push(c);
        }
    }
    if edges.is_empty() {
        if let Some(&next) = xs.iter().find(|&&x| x > min) {
            edges.push(next);
        }
    }
    edges
}
