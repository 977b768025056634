//! The van Rossum distance between small hand-made spike trains.

use snnfc::encoding::{van_rossum_distance, SpikePattern};

fn main() -> snnfc::Result<()> {
    let tau = 10.0;
    let base = SpikePattern::from_times(1, 80, &[vec![10, 40]]);
    println!("d(x, x) = {}", van_rossum_distance(&base, &base, tau)?);
    for shift in [1, 2, 5, 10, 20] {
        let moved = SpikePattern::from_times(1, 80, &[vec![10 + shift, 40 + shift]]);
        println!("both spikes moved by {shift:2}: d = {:.4}", van_rossum_distance(&base, &moved, tau)?);
    }
    let extra = SpikePattern::from_times(1, 80, &[vec![10, 40, 60]]);
    let empty = SpikePattern::zeros(1, 80);
    println!("one extra spike: d = {:.4}", van_rossum_distance(&base, &extra, tau)?);
    println!("against silence: d = {:.4}", van_rossum_distance(&base, &empty, tau)?);
    Ok(())
}
