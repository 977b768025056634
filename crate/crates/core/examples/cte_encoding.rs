//! Encodes a few Car records and shows how shared key-value pairs turn into
//! coincident spikes.

use snnfc::dataset::uci::{default_data_dir, prepare, DatasetName, PrepareOptions};
use snnfc::encoding::{build_codebook, encode_record, van_rossum_distance, CteConfig, DEFAULT_TAU};

fn main() -> snnfc::Result<()> {
    let d = prepare(DatasetName::Car, &default_data_dir(), &PrepareOptions::default())?;
    let cb = build_codebook(&d.schema, CteConfig::default())?;
    println!("{} keys, {} input neurons, {} steps", cb.n_keys(), cb.n_inputs(), cb.n_steps());

    let recs = d.train_records();
    let a = &recs[0];
    let pa = encode_record(a, &cb)?;
    println!("record 0: {} spikes, per-neuron counts of key 0 {:?}", pa.total_spikes(), &pa.neuron_counts()[cb.neuron_group(0)]);

    // more shared pairs should mean more coincident spikes and a smaller distance
    for b in recs.iter().skip(1).take(8) {
        let pb = encode_record(b, &cb)?;
        println!(
            "shared pairs {}  coincident spikes {:3}  van Rossum distance {:.3}",
            a.shared_pairs(b),
            pa.inner(&pb)?,
            van_rossum_distance(&pa, &pb, DEFAULT_TAU)?
        );
    }
    Ok(())
}
