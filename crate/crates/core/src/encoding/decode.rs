use super::distance::{kernel_traces, trace_distance_sq};
use super::{SpikePattern, TargetPatternSet};
use crate::error::{Error, Result};

/// Class of the most active output neuron; ties go to the lowest neuron
/// index, so a silent output decodes to `class_map[0]`.
pub fn decode_rate(output: &SpikePattern, class_map: &[usize]) -> usize {
    let counts = output.neuron_counts();
    let mut best = 0;
    for (n, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = n;
        }
    }
    class_map[best]
}

/// Nearest-target decoder with the target traces precomputed.
#[derive(Debug, Clone)]
pub struct TemporalDecoder {
    tau: f64,
    shape: (usize, usize),
    target_traces: Vec<Vec<f64>>,
}

impl TemporalDecoder {
    pub fn new(targets: &TargetPatternSet, tau: f64) -> Self {
        Self {
            tau,
            shape: targets.pattern(0).shape(),
            target_traces: targets.patterns().iter().map(|p| kernel_traces(p, tau)).collect(),
        }
    }

    /// Distances from `output` to every class target.
    pub fn distances(&self, output: &SpikePattern) -> Result<Vec<f64>> {
        if output.shape() != self.shape {
            return Err(Error::Shape(format!("output {:?} vs targets {:?}", output.shape(), self.shape)));
        }
        let tr = kernel_traces(output, self.tau);
        Ok(self
            .target_traces
            .iter()
            .map(|t| trace_distance_sq(&tr, t, self.tau).sqrt())
            .collect())
    }

    /// Argmin of the distances; ties go to the lowest class index.
    pub fn decode(&self, output: &SpikePattern) -> Result<usize> {
        let d = self.distances(output)?;
        let mut best = 0;
        for (c, &v) in d.iter().enumerate() {
            if v < d[best] {
                best = c;
            }
        }
        Ok(best)
    }
}

pub fn decode_temporal(output: &SpikePattern, targets: &TargetPatternSet, tau: f64) -> Result<usize> {
    TemporalDecoder::new(targets, tau).decode(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{generate_targets, van_rossum_distance, TargetConfig};

    fn counts_pattern(counts: &[usize]) -> SpikePattern {
        let times: Vec<Vec<usize>> = counts.iter().map(|&c| (0..c).collect()).collect();
        SpikePattern::from_times(counts.len(), 20, &times)
    }

    #[test]
    fn rate_argmax_and_ties() {
        assert_eq!(decode_rate(&counts_pattern(&[3, 7, 2]), &[0, 1, 2]), 1);
        assert_eq!(decode_rate(&counts_pattern(&[0, 0, 0]), &[2, 1, 0]), 2);
        assert_eq!(decode_rate(&counts_pattern(&[5, 5, 1]), &[1, 0, 2]), 1);
    }

    #[test]
    fn target_decodes_to_itself() {
        let t = generate_targets(4, 8, 80, 2).unwrap();
        for c in 0..4 {
            assert_eq!(decode_temporal(t.pattern(c), &t, 10.0).unwrap(), c);
        }
    }

    #[test]
    fn silent_output_picks_least_energy_target() {
        let t = TargetPatternSet::generate(
            3,
            TargetConfig {
                spikes_per_target: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let silent = SpikePattern::zeros(3, 80);
        let energies: Vec<f64> = (0..3)
            .map(|c| van_rossum_distance(t.pattern(c), &silent, 10.0).unwrap())
            .collect();
        let expected = (0..3).fold(0, |b, c| if energies[c] < energies[b] { c } else { b });
        assert_eq!(decode_temporal(&silent, &t, 10.0).unwrap(), expected);
    }

    #[test]
    fn shape_checked() {
        let t = generate_targets(2, 2, 80, 2).unwrap();
        assert!(decode_temporal(&SpikePattern::zeros(3, 80), &t, 10.0).is_err());
    }
}
