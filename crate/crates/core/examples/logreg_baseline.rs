//! Multinomial logistic regression on one-hot features, the non-spiking
//! reference.

use snnfc::baseline::{logreg_predict, logreg_train, LogRegConfig};
use snnfc::dataset::one_hot;
use snnfc::dataset::uci::{available, default_data_dir, prepare, DatasetName, PrepareOptions};

fn main() -> snnfc::Result<()> {
    let dir = default_data_dir();
    for name in DatasetName::ALL {
        if !available(name, &dir) {
            println!("{}: raw files not found, skipped", name.as_str());
            continue;
        }
        let d = prepare(name, &dir, &PrepareOptions::default())?;
        let xy = |recs: Vec<_>| -> (Vec<Vec<f64>>, Vec<usize>) {
            recs.iter().map(|r: &snnfc::dataset::KeyValueRecord| (one_hot(r, &d.schema), r.label)).unzip()
        };
        let (xs, ys) = xy(d.train_records());
        let (xt, yt) = xy(d.test_records());
        let (model, losses) = logreg_train(&xs, &ys, d.schema.n_classes(), &LogRegConfig::default())?;
        let mut hits = 0;
        for (x, &y) in xt.iter().zip(&yt) {
            hits += (logreg_predict(&model, x)? == y) as usize;
        }
        println!(
            "{}: final loss {:.4}, test accuracy {:.4}",
            name.as_str(),
            losses.last().copied().unwrap_or(f64::NAN),
            hits as f64 / yt.len() as f64
        );
    }
    Ok(())
}
