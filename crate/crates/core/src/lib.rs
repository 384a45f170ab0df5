//! Diversity flip decoding for binary linear block codes over i.i.d.
//! Rayleigh fading, with the baseline decoders, analytic bounds and the
//! Monte-Carlo harness used to compare them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baseline;
pub mod bits;
pub mod channel;
pub mod codes;
pub mod decode;
pub mod flip;
pub mod gf2m;
pub mod harness;
pub mod rng;

pub use bits::{BitError, BitMatrix, BitWord};
pub use channel::{ChannelObservation, SnrPoint};
pub use codes::{CodeError, CodeSpec, DistanceProvenance, LinearCode};
pub use decode::{DecodeError, DecodeLimits, DecodeOutcome, Decoder, DecoderSpec, Received};
pub use flip::FlipPatternSet;
pub use harness::{
    HarnessError, ImportanceConfig, ImportanceEstimate, StoppingRule, SweepConfig, SweepRow,
};
