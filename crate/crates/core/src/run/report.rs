use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_file;
use crate::dataset::uci::DatasetName;
use crate::{Error, Result};

/// One accuracy measurement. Software rows leave `noise_scale` and `seed` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub model: String,
    pub noise_scale: Option<f64>,
    pub seed: Option<u64>,
    pub accuracy: f64,
}

impl ResultRow {
    pub fn software(dataset: DatasetName, model: &str, accuracy: f64) -> Self {
        Self {
            dataset: dataset.as_str().into(),
            model: model.into(),
            noise_scale: None,
            seed: None,
            accuracy,
        }
    }

    pub fn hardware(dataset: DatasetName, model: &str, noise_scale: f64, seed: u64, accuracy: f64) -> Self {
        Self {
            noise_scale: Some(noise_scale),
            seed: Some(seed),
            ..Self::software(dataset, model, accuracy)
        }
    }
}

pub fn write_rows(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_file(path, &bytes)
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Two summary tables: software accuracy per dataset and model, and mean
/// crossbar accuracy per noise scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub software_csv: String,
    pub hardware_csv: String,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn table(header: &[String], body: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(String::len).collect();
    for row in body {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(header);
    line(&width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for row in body {
        line(row);
    }
    out
}

fn csv_of(header: &[String], body: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in body {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders collected rows. Repeated software rows (several seeds of the same
/// model) are averaged; missing cells print as `-`.
pub fn render_report(rows: &[ResultRow]) -> Result<Report> {
    let mut sw: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut hw: BTreeMap<(String, String), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    let mut scales = BTreeSet::new();
    for r in rows {
        match r.noise_scale {
            None => sw.entry((r.dataset.clone(), r.model.clone())).or_default().push(r.accuracy),
            Some(s) => {
                // scales are keyed by their bit pattern so they sort and dedupe
                let k = s.to_bits();
                scales.insert(k);
                hw.entry((r.dataset.clone(), r.model.clone())).or_default().entry(k).or_default().push(r.accuracy);
            }
        }
    }

    let datasets: BTreeSet<&String> = sw.keys().map(|k| &k.0).collect();
    let models: BTreeSet<&String> = sw.keys().map(|k| &k.1).collect();
    let mut h1 = vec!["dataset".to_string()];
    h1.extend(models.iter().map(|m| m.to_string()));
    let b1: Vec<Vec<String>> = datasets
        .iter()
        .map(|d| {
            let mut row = vec![d.to_string()];
            row.extend(models.iter().map(|m| match sw.get(&(d.to_string(), m.to_string())) {
                Some(v) => format!("{:.2}", 100.0 * mean(v)),
                None => "-".into(),
            }));
            row
        })
        .collect();

    let mut scales: Vec<f64> = scales.into_iter().map(f64::from_bits).collect();
    scales.sort_by(f64::total_cmp);
    let mut h2 = vec!["dataset".to_string(), "model".to_string(), "software".to_string()];
    h2.extend(scales.iter().map(|s| format!("{s}x")));
    let b2: Vec<Vec<String>> = hw
        .iter()
        .map(|((d, m), by)| {
            let mut row = vec![d.clone(), m.clone()];
            row.push(sw.get(&(d.clone(), m.clone())).map_or("-".into(), |v| format!("{:.2}", 100.0 * mean(v))));
            row.extend(scales.iter().map(|s| by.get(&s.to_bits()).map_or("-".into(), |v| format!("{:.2}", 100.0 * mean(v)))));
            row
        })
        .collect();

    let mut text = String::from("Test accuracy (%), software\n\n");
    text += &table(&h1, &b1);
    if !b2.is_empty() {
        text += "\nTest accuracy (%) on the crossbar by noise scale, mean over seeds\n\n";
        text += &table(&h2, &b2);
    }
    Ok(Report {
        text,
        software_csv: csv_of(&h1, &b1)?,
        hardware_csv: csv_of(&h2, &b2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<ResultRow> {
        vec![
            ResultRow::software(DatasetName::Car, "logreg", 0.86),
            ResultRow::software(DatasetName::Car, "snu-bp-2l", 0.98),
            ResultRow::software(DatasetName::Adult, "logreg", 0.85),
            ResultRow::hardware(DatasetName::Car, "snu-bp-2l", 0.0, 0, 0.98),
            ResultRow::hardware(DatasetName::Car, "snu-bp-2l", 1.0, 0, 0.96),
            ResultRow::hardware(DatasetName::Car, "snu-bp-2l", 1.0, 1, 0.97),
        ]
    }

    #[test]
    fn rows_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_rows(&rows(), &p).unwrap();
        assert_eq!(read_rows(&p).unwrap(), rows());
    }

    #[test]
    fn tables_average_and_align() {
        let r = render_report(&rows()).unwrap();
        assert!(r.software_csv.starts_with("dataset,logreg,snu-bp-2l\n"));
        assert!(r.software_csv.contains("adult,85.00,-\n"));
        assert!(r.hardware_csv.contains("car,snu-bp-2l,98.00,98.00,96.50\n"));
        let lines: Vec<&str> = r.text.lines().filter(|l| l.starts_with("car")).collect();
        assert_eq!(lines.len(), 2);
    }
}
