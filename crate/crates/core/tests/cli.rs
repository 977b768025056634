use std::path::Path;
use std::process::{Command, Output};

use snnfc::dataset::uci::{available, default_data_dir, DatasetName};
use snnfc::run::{read_rows, RunManifest};

fn snnfc(work: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snnfc"))
        .arg("--work-dir")
        .arg(work)
        .args(args)
        .env("SNNFC_DATA_DIR", default_data_dir())
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn have_car() -> bool {
    let ok = available(DatasetName::Car, &default_data_dir());
    if !ok {
        eprintln!("car data not found; skipping");
    }
    ok
}

#[test]
fn usage_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path();
    let o = snnfc(w, &["prepare", "iris"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    for name in ["adult", "nursery", "car", "connect4"] {
        assert!(err.contains(name), "{err}");
    }
    assert_eq!(code(&snnfc(w, &["frobnicate"])), 1);
    assert_eq!(code(&snnfc(w, &["train", "car", "--system", "1", "--target-spikes", "3"])), 1);
    assert_eq!(code(&snnfc(w, &["train", "car", "--system", "3", "--mode", "unsup"])), 1);
    assert_eq!(code(&snnfc(w, &["train", "car", "--system", "3", "--set", "train.epochs"])), 1);
    assert_eq!(code(&snnfc(w, &["--help"])), 0);
}

#[test]
fn missing_data_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = snnfc(dir.path(), &["--data-dir", dir.path().join("nowhere").to_str().unwrap(), "prepare", "car"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn training_failure_exits_with_3() {
    if !have_car() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let o = snnfc(dir.path(), &["train", "car", "--system", "logreg", "--set", "train.logreg.learning_rate=1e300"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn prepare_is_deterministic_and_writes_a_manifest() {
    if !have_car() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path();
    let mut hashes = Vec::new();
    for _ in 0..2 {
        let o = snnfc(w, &["prepare", "car", "--seed", "7"]);
        assert_eq!(code(&o), 0);
        let m = RunManifest::load(&w.join("car/prepared.json.manifest.json")).unwrap();
        let d = m.dataset.unwrap();
        hashes.push((d.train_hash, d.test_hash));
    }
    assert_eq!(hashes[0], hashes[1]);
    snnfc(w, &["prepare", "car", "--seed", "8"]);
    let m = RunManifest::load(&w.join("car/prepared.json.manifest.json")).unwrap();
    assert_ne!(m.dataset.unwrap().train_hash, hashes[0].0);
}

#[test]
fn train_eval_sweep_report() {
    if !have_car() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path();
    let ok = |o: Output| {
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        o
    };

    ok(snnfc(w, &["train", "car", "--system", "logreg"]));
    let model = w.join("car/logreg.model");
    assert!(RunManifest::path_for(&model).exists());
    let e1 = w.join("e1.csv");
    let e2 = w.join("e2.csv");
    ok(snnfc(w, &["eval", model.to_str().unwrap(), "car", "--out", e1.to_str().unwrap()]));
    ok(snnfc(w, &["eval", model.to_str().unwrap(), "car", "--out", e2.to_str().unwrap()]));
    assert_eq!(std::fs::read(&e1).unwrap(), std::fs::read(&e2).unwrap());

    let snu = w.join("snu.model");
    ok(snnfc(w, &["train", "car", "--system", "3", "--hidden", "12", "--epochs", "2", "--out", snu.to_str().unwrap()]));
    let sweep = w.join("sweep.csv");
    ok(snnfc(w, &["sweep-noise", snu.to_str().unwrap(), "car", "--out", sweep.to_str().unwrap()]));
    let rows = read_rows(&sweep).unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.noise_scale.is_some() && r.seed.is_some() && r.dataset == "car"));
    assert!(RunManifest::path_for(&sweep).exists());

    let hw = w.join("hw.csv");
    ok(snnfc(w, &["hw-eval", snu.to_str().unwrap(), "car", "--noise-scale", "5", "--noise-seed", "2", "--out", hw.to_str().unwrap()]));
    let hw_rows = read_rows(&hw).unwrap();
    let same = rows.iter().find(|r| r.noise_scale == Some(5.0) && r.seed == Some(2)).unwrap();
    assert_eq!(hw_rows[0].accuracy, same.accuracy);

    // hardware commands need an SNU model
    assert_eq!(code(&snnfc(w, &["hw-eval", model.to_str().unwrap(), "car"])), 1);

    let out = ok(snnfc(w, &["report", sweep.to_str().unwrap(), e1.to_str().unwrap(), "--out-dir", w.join("rep").to_str().unwrap()]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("logreg") && text.contains("10x"), "{text}");
    assert!(w.join("rep/software.csv").exists() && w.join("rep/hardware.csv").exists());
    assert!(RunManifest::path_for(&w.join("rep/report.txt")).exists());
}
