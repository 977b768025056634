use serde::{Deserialize, Serialize};

use super::noise::{apply_noise, NoiseModel};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossbarConfig {
    /// Conductance ceiling in µS.
    pub g_max: f64,
    /// Largest ADC code; outputs are quantized to `[-adc_levels, adc_levels]`.
    pub adc_levels: i32,
    /// `false` models an ideal, infinite-resolution read-out.
    pub quantize: bool,
    /// Percentile of |pre-activation| on training data used as the full-scale
    /// output of each array.
    pub calibration_percentile: f64,
    /// Training records used for calibration (evenly strided).
    pub calibration_records: usize,
    /// Redraw device noise for every test record instead of once per run.
    pub resample_per_sample: bool,
}

impl Default for CrossbarConfig {
    fn default() -> Self {
        Self {
            g_max: 25.0,
            adc_levels: 127,
            quantize: true,
            calibration_percentile: 99.9,
            calibration_records: 256,
            resample_per_sample: false,
        }
    }
}

/// Differential conductance pair for one weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedWeights {
    pub g_plus: Matrix,
    pub g_minus: Matrix,
    /// Conductance per unit weight.
    pub scale: f64,
}

/// `scale = g_max / max|W|`; positive weights go to `g_plus`, negative ones
/// to `g_minus`. An all-zero matrix maps with scale 1.
pub fn map_weights(w: &Matrix, g_max: f64) -> MappedWeights {
    let m = w.max_abs();
    let scale = if m > 0.0 { g_max / m } else { 1.0 };
    // the largest magnitude lands on g_max exactly, not one rounding away
    let to_g = |a: f64| if a == m { g_max } else { (a * scale).min(g_max) };
    MappedWeights {
        g_plus: w.map(|v| if v > 0.0 { to_g(v) } else { 0.0 }),
        g_minus: w.map(|v| if v < 0.0 { to_g(-v) } else { 0.0 }),
        scale,
    }
}

/// One programmed array with its read-out calibration.
#[derive(Debug, Clone)]
pub struct CrossbarLayer {
    pub mapped: MappedWeights,
    pub output_scale: f64,
    /// `(G+ - G-) / scale`, cached for the read-out.
    effective: Matrix,
}

impl CrossbarLayer {
    pub fn new(mapped: MappedWeights, output_scale: f64) -> Result<Self> {
        if !(output_scale > 0.0 && output_scale.is_finite()) {
            return Err(Error::Config(format!("output scale must be positive, got {output_scale}")));
        }
        let s = mapped.scale;
        let mut effective = mapped.g_plus.clone();
        for (e, &gm) in effective.as_mut_slice().iter_mut().zip(mapped.g_minus.as_slice()) {
            *e = (*e - gm) / s;
        }
        Ok(Self {
            mapped,
            output_scale,
            effective,
        })
    }

    /// Same array after one programming event with noise.
    pub fn programmed(&self, noise: &NoiseModel, g_max: f64, coords: &[u64]) -> Self {
        let mut c = coords.to_vec();
        c.push(0);
        let g_plus = apply_noise(&self.mapped.g_plus, noise, g_max, &mut noise.rng(&c));
        *c.last_mut().unwrap() = 1;
        let g_minus = apply_noise(&self.mapped.g_minus, noise, g_max, &mut noise.rng(&c));
        Self::new(
            MappedWeights {
                g_plus,
                g_minus,
                scale: self.mapped.scale,
            },
            self.output_scale,
        )
        .expect("output scale already validated")
    }

    pub fn effective_weights(&self) -> &Matrix {
        &self.effective
    }

    /// Analog read-out for a binary input given by its active lines.
    pub fn analog_sparse(&self, active: &[usize], out: &mut [f64]) {
        self.effective.matvec_sparse_into(active, out);
    }

    /// ADC code and rescaled value for each analog output.
    pub fn quantize(&self, analog: &mut [f64], codes: Option<&mut [i32]>, levels: i32) {
        let l = levels as f64;
        let mut codes = codes;
        for (i, a) in analog.iter_mut().enumerate() {
            let q = (*a / self.output_scale * l).round().clamp(-l, l);
            if let Some(c) = codes.as_deref_mut() {
                c[i] = q as i32;
            }
            *a = q / l * self.output_scale;
        }
    }
}

/// Full crossbar matrix-vector product for a real input: returns the ADC
/// codes and the rescaled outputs. With an ideal ADC the outputs are the
/// analog values and the codes are still reported.
pub fn crossbar_forward(x: &[f64], layer: &CrossbarLayer, cfg: &CrossbarConfig) -> (Vec<i32>, Vec<f64>) {
    let mut analog = vec![0.0; layer.effective.rows()];
    layer.effective.matvec_into(x, &mut analog);
    let mut codes = vec![0; analog.len()];
    if cfg.quantize {
        layer.quantize(&mut analog, Some(&mut codes), cfg.adc_levels);
    } else {
        let mut scratch = analog.clone();
        layer.quantize(&mut scratch, Some(&mut codes), cfg.adc_levels);
    }
    (codes, analog)
}

/// Value at the given percentile (0–100) of `values`, by nearest rank.
pub fn percentile(values: &mut [f64], pct: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let rank = ((pct / 100.0) * values.len() as f64 - 1e-9).ceil() as usize;
    let k = rank.clamp(1, values.len()) - 1;
    let (_, v, _) = values.select_nth_unstable_by(k, f64::total_cmp);
    *v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn maps_a_signed_row() {
        let m = map_weights(&Matrix::from_vec(1, 2, vec![2.0, -1.0]), 25.0);
        assert_eq!(m.g_plus.as_slice(), &[25.0, 0.0]);
        assert_eq!(m.g_minus.as_slice(), &[0.0, 12.5]);
        assert_eq!(m.scale, 12.5);
    }

    #[test]
    fn zero_matrix_gets_unit_scale() {
        let m = map_weights(&Matrix::zeros(2, 3), 25.0);
        assert_eq!(m.scale, 1.0);
        assert!(m.g_plus.as_slice().iter().chain(m.g_minus.as_slice()).all(|&g| g == 0.0));
    }

    #[test]
    fn zero_input_reads_zero_under_noise() {
        let w = Matrix::from_fn(4, 3, |r, c| r as f64 - c as f64 * 0.7);
        let layer = CrossbarLayer::new(map_weights(&w, 25.0), 2.0).unwrap();
        let noisy = layer.programmed(&NoiseModel::default().with_scale(10.0), 25.0, &[0]);
        let (codes, out) = crossbar_forward(&[0.0; 3], &noisy, &CrossbarConfig::default());
        assert!(codes.iter().all(|&c| c == 0));
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn percentile_by_rank() {
        let mut v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(percentile(&mut v, 99.9), 999.0);
        assert_eq!(percentile(&mut v, 100.0), 1000.0);
        assert_eq!(percentile(&mut [3.0], 50.0), 3.0);
    }

    fn weights() -> impl Strategy<Value = Matrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3.0f64..3.0, r * c).prop_map(move |v| Matrix::from_vec(r, c, v))
        })
    }

    proptest! {
        #[test]
        fn mapping_round_trips(w in weights()) {
            let m = map_weights(&w, 25.0);
            let layer = CrossbarLayer::new(m, 1.0).unwrap();
            for (a, b) in layer.effective_weights().as_slice().iter().zip(w.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }

        #[test]
        fn one_device_per_weight_and_peak_at_g_max(w in weights()) {
            prop_assume!(w.max_abs() > 0.0);
            let m = map_weights(&w, 25.0);
            let all = m.g_plus.as_slice().iter().chain(m.g_minus.as_slice());
            prop_assert!(all.clone().all(|g| (0.0..=25.0).contains(g)));
            prop_assert_eq!(all.fold(0.0f64, |a, &b| a.max(b)), 25.0);
            for (p, n) in m.g_plus.as_slice().iter().zip(m.g_minus.as_slice()) {
                prop_assert!(*p == 0.0 || *n == 0.0);
            }
        }

        #[test]
        fn quantization_error_is_half_a_step(w in weights(), seed in 0u64..1000, out_scale in 0.5f64..5.0) {
            use rand::Rng;
            let mut rng = crate::rng::stream_rng(seed, &[]);
            let x: Vec<f64> = (0..w.cols()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let layer = CrossbarLayer::new(map_weights(&w, 25.0), out_scale).unwrap();
            let mut exact = vec![0.0; w.rows()];
            w.matvec_into(&x, &mut exact);
            let (codes, out) = crossbar_forward(&x, &layer, &CrossbarConfig::default());
            let step = out_scale / 127.0;
            for i in 0..exact.len() {
                prop_assert!(codes[i].abs() <= 127);
                if exact[i].abs() <= out_scale {
                    prop_assert!((out[i] - exact[i]).abs() <= step / 2.0 + 1e-12, "{} vs {}", out[i], exact[i]);
                }
            }
        }
    }
}
