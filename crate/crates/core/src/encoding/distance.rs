use super::SpikePattern;
use crate::error::{Error, Result};

/// Causal exponential traces of every neuron, `trace_t = trace_{t-1}·e^{-1/tau} + s_t`,
/// laid out like the pattern (neuron-major).
pub fn kernel_traces(p: &SpikePattern, tau: f64) -> Vec<f64> {
    let decay = (-1.0 / tau).exp();
    let mut out = Vec::with_capacity(p.n_neurons() * p.n_steps());
    for n in 0..p.n_neurons() {
        let mut tr = 0.0;
        for &s in p.neuron(n) {
            tr = tr * decay + s as f64;
            out.push(tr);
        }
    }
    out
}

/// Squared distance between two trace vectors, scaled by `dt / tau` (dt = 1).
pub(crate) fn trace_distance_sq(a: &[f64], b: &[f64], tau: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / tau
}

/// van Rossum distance between two patterns of equal shape.
pub fn van_rossum_distance(a: &SpikePattern, b: &SpikePattern, tau: f64) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    Ok(trace_distance_sq(&kernel_traces(a, tau), &kernel_traces(b, tau), tau).sqrt())
}
