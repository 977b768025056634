//! Spiking-neural-network classification of files described by key-value
//! metadata.
//!
//! The pipeline is: UCI-style records ([`dataset`]) are turned into spike
//! patterns by the correlative temporal encoder ([`encoding`]), fed through
//! LIF, SRM or SNU neurons ([`neuron`]) trained with STDP, probabilistic
//! backpropagation or BPTT ([`learning`]), and optionally re-evaluated on a
//! simulated memristive crossbar ([`hardware`]). A logistic-regression
//! reference lives in [`baseline`]; [`run`] holds the orchestration used by
//! the `snnfc` binary.

pub mod baseline;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod hardware;
pub mod learning;
pub mod matrix;
pub mod neuron;
pub mod rng;
pub mod run;

pub use error::{Error, Result};
pub use matrix::Matrix;
