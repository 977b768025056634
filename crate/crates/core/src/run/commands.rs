use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{model_label, RunConfig};
use super::report::{read_rows, render_report, write_rows, ResultRow};
use super::{write_file, RunManifest};
use crate::dataset::uci::{self, DatasetName, PrepareOptions, PreparedDataset};
use crate::hardware::{mean_by_scale, noise_sweep, HardwareSim};
use crate::learning::{self, TrainedModel};
use crate::{Error, Result};

/// Shared inputs of every command.
#[derive(Debug, Clone)]
pub struct Context {
    /// Where prepared datasets, models and results go by default.
    pub work_dir: PathBuf,
    pub config: RunConfig,
    /// Command line, recorded in manifests.
    pub argv: Vec<String>,
}

impl Context {
    pub fn new(work_dir: impl Into<PathBuf>, config: RunConfig) -> Self {
        Self {
            work_dir: work_dir.into(),
            config,
            argv: Vec::new(),
        }
    }

    fn data_dir(&self) -> PathBuf {
        self.config.data.data_dir.clone().unwrap_or_else(uci::default_data_dir)
    }

    fn dataset_dir(&self, name: DatasetName) -> PathBuf {
        self.work_dir.join(name.as_str())
    }
}

/// Result of one command: its manifest, where that was written, the main
/// artifact, and a one-line summary for the terminal.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub artifact: PathBuf,
    pub summary: String,
}

#[derive(Serialize, Deserialize)]
struct PreparedCache {
    options: PrepareOptions,
    dataset: PreparedDataset,
}

fn cache_path(ctx: &Context, name: DatasetName) -> PathBuf {
    ctx.dataset_dir(name).join("prepared.json")
}

/// The prepared dataset from the work directory, re-preparing when the
/// cache is missing or was built with other options.
pub fn load_dataset(ctx: &Context, name: DatasetName) -> Result<PreparedDataset> {
    let path = cache_path(ctx, name);
    if let Ok(text) = std::fs::read_to_string(&path) {
        match serde_json::from_str::<PreparedCache>(&text) {
            Ok(c) if c.options == ctx.config.data.prepare && c.dataset.name == name => return Ok(c.dataset),
            Ok(_) => log::info!("{}: prepared with other options, preparing again", path.display()),
            Err(e) => log::warn!("{}: unreadable cache ({e}), preparing again", path.display()),
        }
    }
    let d = uci::prepare(name, &ctx.data_dir(), &ctx.config.data.prepare)?;
    let cache = PreparedCache {
        options: ctx.config.data.prepare.clone(),
        dataset: d,
    };
    write_file(&path, serde_json::to_string(&cache)?.as_bytes())?;
    Ok(cache.dataset)
}

fn finish(mut manifest: RunManifest, artifact: PathBuf, started: Instant, summary: String) -> Result<Outcome> {
    manifest.wall_clock_ms = started.elapsed().as_millis() as u64;
    let manifest_path = RunManifest::path_for(&artifact);
    manifest.save(&manifest_path)?;
    Ok(Outcome {
        manifest,
        manifest_path,
        artifact,
        summary,
    })
}

pub fn prepare(ctx: &Context, name: DatasetName) -> Result<Outcome> {
    let started = Instant::now();
    // always rebuild so that checksums are verified afresh
    let _ = std::fs::remove_file(cache_path(ctx, name));
    let d = load_dataset(ctx, name)?;
    let dm = d.manifest();
    let summary = format!(
        "{}: {} records, {} train / {} test, train hash {}",
        name.as_str(),
        dm.n_records,
        dm.n_train,
        dm.n_test,
        &dm.train_hash[..16]
    );
    let mut m = RunManifest::new("prepare", ctx);
    m.dataset = Some(dm);
    finish(m, cache_path(ctx, name), started, summary)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Trains `ctx.config.train` on the training split, evaluates on the test
/// split and writes the model to `out` (default: the work directory).
pub fn train(ctx: &Context, name: DatasetName, out: Option<&Path>) -> Result<Outcome> {
    let started = Instant::now();
    let cfg = &ctx.config.train;
    let d = load_dataset(ctx, name)?;
    let label = model_label(cfg);
    let mut model = learning::train(&d.train_records(), &d.schema, cfg)?;
    let eval = model.evaluate(&d.test_records())?;
    model.manifest.dataset = Some(name.as_str().to_string());
    model.manifest.test_metrics = Some(eval.clone());
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| ctx.dataset_dir(name).join(format!("{label}.model")));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    model.save(&path)?;
    let mut m = RunManifest::new("train", ctx);
    m.dataset = Some(d.manifest());
    m.model_sha256 = Some(sha256_file(&path)?);
    m.model_file = Some(path.clone());
    m.loss_curve = model.manifest.loss_curve.clone();
    m.rows = vec![ResultRow::software(name, &label, eval.accuracy)];
    m.metrics = Some(eval.clone());
    let summary = format!("{label} on {}: test accuracy {:.4}", name.as_str(), eval.accuracy);
    finish(m, path, started, summary)
}

struct Loaded {
    model: TrainedModel,
    data: PreparedDataset,
    label: String,
    sha: String,
}

fn load_pair(ctx: &Context, model_path: &Path, name: DatasetName) -> Result<Loaded> {
    let model = TrainedModel::load(model_path)?;
    let data = load_dataset(ctx, name)?;
    model.check_schema(&data.schema)?;
    Ok(Loaded {
        label: model_label(&model.manifest.config),
        sha: sha256_file(model_path)?,
        model,
        data,
    })
}

fn results_path(ctx: &Context, name: DatasetName, label: &str, command: &str, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .unwrap_or_else(|| ctx.dataset_dir(name).join(format!("{label}.{command}.csv")))
}

fn base_manifest(command: &str, ctx: &Context, l: &Loaded, model_path: &Path) -> RunManifest {
    let mut m = RunManifest::new(command, ctx);
    m.dataset = Some(l.data.manifest());
    m.model_file = Some(model_path.to_path_buf());
    m.model_sha256 = Some(l.sha.clone());
    m
}

/// Software evaluation of a stored model on the test split.
pub fn eval(ctx: &Context, model_path: &Path, name: DatasetName, out: Option<&Path>) -> Result<Outcome> {
    let started = Instant::now();
    let l = load_pair(ctx, model_path, name)?;
    let e = l.model.evaluate(&l.data.test_records())?;
    let rows = vec![ResultRow::software(name, &l.label, e.accuracy)];
    let path = results_path(ctx, name, &l.label, "eval", out);
    write_rows(&rows, &path)?;
    let mut m = base_manifest("eval", ctx, &l, model_path);
    m.rows = rows;
    m.metrics = Some(e.clone());
    let summary = format!("{} on {}: accuracy {:.4}", l.label, name.as_str(), e.accuracy);
    finish(m, path, started, summary)
}

/// Crossbar evaluation at the configured noise model.
pub fn hw_eval(ctx: &Context, model_path: &Path, name: DatasetName, out: Option<&Path>) -> Result<Outcome> {
    let started = Instant::now();
    let l = load_pair(ctx, model_path, name)?;
    let hw = &ctx.config.hardware;
    let sim = HardwareSim::new(&l.model, &l.data.train_records(), &hw.crossbar)?;
    let e = sim.evaluate(&l.data.test_records(), &hw.noise)?;
    let rows = vec![ResultRow::hardware(name, &l.label, hw.noise.noise_scale, hw.noise.seed, e.accuracy)];
    let path = results_path(ctx, name, &l.label, "hw-eval", out);
    write_rows(&rows, &path)?;
    let mut m = base_manifest("hw-eval", ctx, &l, model_path);
    m.rows = rows;
    m.metrics = Some(e.clone());
    let summary = format!(
        "{} on {} (noise x{}, seed {}): accuracy {:.4}",
        l.label,
        name.as_str(),
        hw.noise.noise_scale,
        hw.noise.seed,
        e.accuracy
    );
    finish(m, path, started, summary)
}

/// Crossbar accuracy over every configured noise scale and seed. The software
/// accuracy of the same model goes into the manifest metrics.
pub fn sweep_noise(ctx: &Context, model_path: &Path, name: DatasetName, out: Option<&Path>) -> Result<Outcome> {
    let started = Instant::now();
    let l = load_pair(ctx, model_path, name)?;
    let hw = &ctx.config.hardware;
    let test = l.data.test_records();
    let sim = HardwareSim::new(&l.model, &l.data.train_records(), &hw.crossbar)?;
    let sw = l.model.evaluate(&test)?;
    let sweep = noise_sweep(&sim, name.as_str(), &test, &hw.noise, &hw.scales, &hw.seeds)?;
    let means: Vec<String> = mean_by_scale(&sweep).iter().map(|(s, a)| format!("x{s}: {a:.4}")).collect();
    let rows: Vec<ResultRow> = sweep
        .into_iter()
        .map(|r| ResultRow::hardware(name, &l.label, r.noise_scale, r.seed, r.accuracy))
        .collect();
    let path = results_path(ctx, name, &l.label, "sweep", out);
    write_rows(&rows, &path)?;
    let mut m = base_manifest("sweep-noise", ctx, &l, model_path);
    m.rows = rows;
    let summary = format!("{} on {}: software {:.4}; {}", l.label, name.as_str(), sw.accuracy, means.join(", "));
    m.metrics = Some(sw);
    finish(m, path, started, summary)
}

/// Collects result CSVs into the two summary tables and writes them as
/// `software.csv`, `hardware.csv` and `report.txt` under `out_dir`.
pub fn report(ctx: &Context, inputs: &[PathBuf], out_dir: Option<&Path>) -> Result<Outcome> {
    let started = Instant::now();
    let mut rows = Vec::new();
    for p in inputs {
        rows.extend(read_rows(p)?);
    }
    let r = render_report(&rows)?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| ctx.work_dir.join("report"));
    write_file(&dir.join("software.csv"), r.software_csv.as_bytes())?;
    write_file(&dir.join("hardware.csv"), r.hardware_csv.as_bytes())?;
    let text_path = dir.join("report.txt");
    write_file(&text_path, r.text.as_bytes())?;
    let mut m = RunManifest::new("report", ctx);
    m.rows = rows;
    finish(m, text_path, started, r.text)
}
