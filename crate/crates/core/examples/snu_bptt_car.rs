//! Two-layer SNU network trained by backpropagation through time on Car.
//! Pass an epoch count to shorten the run.

use snnfc::dataset::uci::{default_data_dir, prepare, DatasetName, PrepareOptions};
use snnfc::learning::train;
use snnfc::run::{preset, System};

fn main() -> snnfc::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let d = prepare(DatasetName::Car, &default_data_dir(), &PrepareOptions::default())?;
    let mut cfg = preset(System::Snu { layers: 2 });
    if let Some(e) = std::env::args().nth(1) {
        cfg.epochs = e.parse().expect("epoch count");
    }
    let m = train(&d.train_records(), &d.schema, &cfg)?;
    let e = m.evaluate(&d.test_records())?;
    println!("test accuracy {:.4}", e.accuracy);
    println!("confusion (rows = truth):\n{:?}", e.confusion);
    Ok(())
}
