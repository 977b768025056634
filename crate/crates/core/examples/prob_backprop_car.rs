//! SRM networks trained by probabilistic backpropagation on Car, with one
//! and two layers.

use snnfc::dataset::uci::{default_data_dir, prepare, DatasetName, PrepareOptions};
use snnfc::learning::train;
use snnfc::run::{preset, System};

fn main() -> snnfc::Result<()> {
    env_logger::init();
    let d = prepare(DatasetName::Car, &default_data_dir(), &PrepareOptions::default())?;
    let (tr, te) = (d.train_records(), d.test_records());
    for layers in [1, 2] {
        let m = train(&tr, &d.schema, &preset(System::ProbBp { layers }))?;
        let curve = &m.manifest.loss_curve;
        println!(
            "{layers} layer(s): loss {:.4} -> {:.4}, test accuracy {:.4}",
            curve.first().map_or(f64::NAN, |e| e.loss),
            curve.last().map_or(f64::NAN, |e| e.loss),
            m.evaluate(&te)?.accuracy
        );
    }
    Ok(())
}
