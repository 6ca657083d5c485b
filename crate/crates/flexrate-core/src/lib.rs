//! Analytical engine for the expected data rate of a mmWave link under
//! self-body blockage, across 5G NR numerologies and scheduling intervals.
//!
//! The pipeline: blockage geometry gives a per-coherence-interval blockage
//! probability; the channel model turns path loss and composite fading into
//! an SNR ccdf and conditional spectral-efficiency expectations; the rate
//! engine mixes them over the absorbing blockage process into a closed-form
//! expected rate per (numerology, scheduling interval) and picks the
//! rate-maximizing configuration. A validation layer re-derives every
//! numerical step through an independent route.

// negated comparisons like `!(x > 0.0)` are deliberate: they reject NaN
// along with the out-of-domain sign
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockage;
pub mod channel;
pub mod error;
pub mod quad;
pub mod radio;
pub mod rate;
pub mod specfun;
pub mod timebase;
pub mod validation;

pub use error::{Error, Result};
