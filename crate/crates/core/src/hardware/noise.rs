use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{stream, stream_rng};
use crate::{Error, Matrix, Result};

/// Conductance-dependent programming noise: a quadratic standard deviation
/// `sigma(g) = c0 + c1 g + c2 g^2` (µS) scaled by `noise_scale`.
///
/// The default coefficients describe a plausible concave fit over 0–25 µS;
/// they are configuration, not measured device data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            c0: 0.3,
            c1: 0.05,
            c2: -0.0008,
            noise_scale: 1.0,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn with_scale(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sigma(&self, g: f64) -> f64 {
        self.c0 + self.c1 * g + self.c2 * g * g
    }

    /// Rejects a polynomial that goes negative anywhere on `[0, g_max]` or a
    /// negative scale.
    pub fn validate(&self, g_max: f64) -> Result<()> {
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config(format!("noise scale must be a finite non-negative number, got {}", self.noise_scale)));
        }
        // a quadratic attains its minimum over an interval at an end or the vertex
        let mut probes = vec![0.0, g_max];
        if self.c2 != 0.0 {
            let v = -self.c1 / (2.0 * self.c2);
            if (0.0..=g_max).contains(&v) {
                probes.push(v);
            }
        }
        match probes.into_iter().find(|&g| !(self.sigma(g) >= 0.0)) {
            Some(g) => Err(Error::Config(format!("noise sigma is negative at g = {g} µS"))),
            None => Ok(()),
        }
    }

    /// Generator for one programming event; `coords` tell apart layers,
    /// device polarity and (when resampling) samples.
    pub fn rng(&self, coords: &[u64]) -> ChaCha8Rng {
        let mut c = vec![stream::NOISE];
        c.extend_from_slice(coords);
        stream_rng(self.seed, &c)
    }
}

/// `G' = clip(G + scale * sigma(G) * N(0, 1), 0, g_max)`, element-wise.
pub fn apply_noise(g: &Matrix, model: &NoiseModel, g_max: f64, rng: &mut impl Rng) -> Matrix {
    if model.noise_scale == 0.0 {
        return g.clone();
    }
    let mut out = g.clone();
    for v in out.as_mut_slice() {
        let z: f64 = rng.sample(StandardNormal);
        *v = (*v + model.noise_scale * model.sigma(*v) * z).clamp(0.0, g_max);
    }
    out
}
