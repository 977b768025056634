use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary `n_neurons × n_steps` spike raster, stored row-major by neuron.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpikePattern {
    n_neurons: usize,
    n_steps: usize,
    spikes: Vec<u8>,
}

impl SpikePattern {
    pub fn zeros(n_neurons: usize, n_steps: usize) -> Self {
        Self {
            n_neurons,
            n_steps,
            spikes: vec![0; n_neurons * n_steps],
        }
    }

    /// Builds a pattern from raw 0/1 bytes (row-major by neuron).
    pub fn from_bits(n_neurons: usize, n_steps: usize, spikes: Vec<u8>) -> Result<Self> {
        if spikes.len() != n_neurons * n_steps {
            return Err(Error::Shape(format!(
                "{} bits for a {n_neurons}x{n_steps} pattern",
                spikes.len()
            )));
        }
        if spikes.iter().any(|&b| b > 1) {
            return Err(Error::Shape("spike entries must be 0 or 1".into()));
        }
        Ok(Self { n_neurons, n_steps, spikes })
    }

    /// Builds a pattern from per-neuron lists of spike times.
    pub fn from_times(n_neurons: usize, n_steps: usize, times: &[Vec<usize>]) -> Self {
        let mut p = Self::zeros(n_neurons, n_steps);
        for (n, ts) in times.iter().enumerate() {
            for &t in ts {
                p.set(n, t, true);
            }
        }
        p
    }

    #[inline]
    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.n_neurons, self.n_steps)
    }

    #[inline]
    pub fn get(&self, neuron: usize, t: usize) -> bool {
        self.spikes[neuron * self.n_steps + t] == 1
    }

    #[inline]
    pub fn set(&mut self, neuron: usize, t: usize, spike: bool) {
        self.spikes[neuron * self.n_steps + t] = spike as u8;
    }

    #[inline]
    pub fn neuron(&self, neuron: usize) -> &[u8] {
        &self.spikes[neuron * self.n_steps..(neuron + 1) * self.n_steps]
    }

    pub(crate) fn neuron_mut(&mut self, neuron: usize) -> &mut [u8] {
        &mut self.spikes[neuron * self.n_steps..(neuron + 1) * self.n_steps]
    }

    pub fn bits(&self) -> &[u8] {
        &self.spikes
    }

    pub fn total_spikes(&self) -> usize {
        self.spikes.iter().map(|&b| b as usize).sum()
    }

    pub fn neuron_counts(&self) -> Vec<usize> {
        (0..self.n_neurons)
            .map(|n| self.neuron(n).iter().map(|&b| b as usize).sum())
            .collect()
    }

    pub fn spike_times(&self, neuron: usize) -> Vec<usize> {
        self.neuron(neuron)
            .iter()
            .enumerate()
            .filter_map(|(t, &b)| (b == 1).then_some(t))
            .collect()
    }

    /// Flattened inner product (number of coincident spikes).
    pub fn inner(&self, other: &SpikePattern) -> Result<usize> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(self
            .spikes
            .iter()
            .zip(&other.spikes)
            .map(|(&a, &b)| (a & b) as usize)
            .sum())
    }

    /// Active neuron indices for every timestep.
    pub fn active_by_step(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_steps];
        for n in 0..self.n_neurons {
            for (t, &b) in self.neuron(n).iter().enumerate() {
                if b == 1 {
                    out[t].push(n);
                }
            }
        }
        out
    }

    /// Dense `n_steps × n_neurons` 0/1 matrix as `f64`, step-major.
    pub fn to_step_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_neurons * self.n_steps];
        for n in 0..self.n_neurons {
            for (t, &b) in self.neuron(n).iter().enumerate() {
                out[t * self.n_neurons + n] = b as f64;
            }
        }
        out
    }
}
