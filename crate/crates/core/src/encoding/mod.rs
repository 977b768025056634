//! Correlative temporal encoding (CTE) of key-value records into spike
//! patterns, class target patterns, the van Rossum metric and the two output
//! decoders.

mod codebook;
mod decode;
mod distance;
mod pattern;
mod targets;

pub use codebook::{build_codebook, encode_record, CodebookSpec, CteCodebook, CteConfig};
pub use decode::{decode_rate, decode_temporal, TemporalDecoder};
pub use distance::{kernel_traces, van_rossum_distance};
pub use pattern::SpikePattern;
pub use targets::{generate_targets, TargetConfig, TargetPatternSet, TargetSpec};

/// Default van Rossum kernel time constant, in timesteps.
pub const DEFAULT_TAU: f64 = 10.0;
