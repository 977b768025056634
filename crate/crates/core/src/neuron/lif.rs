use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifParams {
    pub threshold: f64,
    /// Per-step membrane retention factor in (0, 1).
    pub leak_factor: f64,
    /// Steps a neuron stays silent after spiking.
    pub refractory: usize,
    pub resting: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            leak_factor: 0.9,
            refractory: 2,
            resting: 0.0,
        }
    }
}

/// Discrete-time leaky integrate-and-fire population.
#[derive(Debug, Clone, PartialEq)]
pub struct LifState {
    pub params: LifParams,
    pub membrane: Vec<f64>,
    pub refractory_remaining: Vec<usize>,
}

impl LifState {
    pub fn new(n: usize, params: LifParams) -> Self {
        Self {
            params,
            membrane: vec![params.resting; n],
            refractory_remaining: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.membrane.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membrane.is_empty()
    }

    pub fn reset(&mut self) {
        self.membrane.fill(self.params.resting);
        self.refractory_remaining.fill(0);
    }

    /// Advances one step with a per-neuron threshold offset (adaptive
    /// thresholds); writes spikes into `spikes`.
    pub fn step_with_offsets(&mut self, input: &[f64], offsets: Option<&[f64]>, spikes: &mut [bool]) {
        let p = self.params;
        for i in 0..self.membrane.len() {
            if self.refractory_remaining[i] > 0 {
                self.refractory_remaining[i] -= 1;
                spikes[i] = false;
                continue;
            }
            let m = p.resting + p.leak_factor * (self.membrane[i] - p.resting) + input[i];
            let theta = p.threshold + offsets.map_or(0.0, |o| o[i]);
            if m >= theta {
                spikes[i] = true;
                self.membrane[i] = p.resting;
                self.refractory_remaining[i] = p.refractory;
            } else {
                spikes[i] = false;
                self.membrane[i] = m;
            }
        }
    }
}

/// `membrane ← resting + λ·(membrane − resting) + input` for non-refractory
/// neurons; a neuron at or above threshold spikes, resets to rest and goes
/// refractory.
pub fn lif_step(state: &mut LifState, input_current: &[f64]) -> Vec<bool> {
    let mut spikes = vec![false; state.len()];
    state.step_with_offsets(input_current, None, &mut spikes);
    spikes
}
