//! Maps a trained SNU network onto simulated memristive crossbars and sweeps
//! the programming-noise scale. Trains a short model unless a model file is
//! given.

use snnfc::dataset::uci::{default_data_dir, prepare, DatasetName, PrepareOptions};
use snnfc::hardware::{mean_by_scale, noise_sweep, CrossbarConfig, HardwareSim, NoiseModel};
use snnfc::learning::{train, TrainedModel};
use snnfc::run::{preset, System};

fn main() -> snnfc::Result<()> {
    let d = prepare(DatasetName::Car, &default_data_dir(), &PrepareOptions::default())?;
    let (tr, te) = (d.train_records(), d.test_records());
    let model = match std::env::args().nth(1) {
        Some(p) => TrainedModel::load(p.as_ref())?,
        None => {
            let mut cfg = preset(System::Snu { layers: 2 });
            cfg.epochs = 20;
            train(&tr, &d.schema, &cfg)?
        }
    };
    println!("software: {:.4}", model.evaluate(&te)?.accuracy);

    let sim = HardwareSim::new(&model, &tr, &CrossbarConfig::default())?;
    println!("ADC full-scale per layer: {:?}", sim.output_scales());
    let rows = noise_sweep(&sim, "car", &te, &NoiseModel::default(), &[0.0, 1.0, 5.0, 10.0], &[0, 1, 2])?;
    for (scale, acc) in mean_by_scale(&rows) {
        println!("noise x{scale:<4} mean accuracy {acc:.4}");
    }
    Ok(())
}
