//! STDP on Car: the supervised network and the unsupervised one read out
//! by rate and by van Rossum distance.

use snnfc::dataset::majority_fraction;
use snnfc::dataset::uci::{default_data_dir, prepare, DatasetName, PrepareOptions};
use snnfc::learning::{train, UnsupDecoder};
use snnfc::run::{preset, System};

fn main() -> snnfc::Result<()> {
    let d = prepare(DatasetName::Car, &default_data_dir(), &PrepareOptions::default())?;
    let (tr, te) = (d.train_records(), d.test_records());
    println!("majority class: {:.3}", majority_fraction(&te, d.schema.n_classes()));

    let sup = train(&tr, &d.schema, &preset(System::Stdp { supervised: true }))?;
    println!("supervised STDP: {:.4}", sup.evaluate(&te)?.accuracy);

    let mut cfg = preset(System::Stdp { supervised: false });
    for dec in [UnsupDecoder::Rate, UnsupDecoder::VanRossum] {
        cfg.stdp.decoder = dec;
        let m = train(&tr, &d.schema, &cfg)?;
        println!("unsupervised STDP, {dec:?} read-out: {:.4}", m.evaluate(&te)?.accuracy);
    }
    Ok(())
}
