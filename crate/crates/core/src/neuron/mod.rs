//! Neuron models: discrete LIF (STDP networks), SRM with PSP/reset kernels
//! and escape noise (probabilistic backpropagation), and the SNU cell
//! (deterministic BPTT).

mod lif;
mod snu;
mod srm;

pub use lif::{lif_step, LifParams, LifState};
pub use snu::{snu_step, snu_update, OutputActivation, SnuLayer, StateActivation};
pub use srm::{psp_traces, reset_trace, spike_probability, srm_membrane, PspFilter, SrmKernels};
pub(crate) use srm::softplus;
