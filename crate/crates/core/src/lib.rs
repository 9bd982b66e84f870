//! Erasure decoding of convolutional codes through their input-state-output
//! representation.
//!
//! The crate covers finite-field linear algebra ([`field`], [`matrix`],
//! [`poly`]), polynomial generator matrices and MDP checks ([`convcode`]),
//! state-space systems and their structural matrices ([`sysrep`]), the
//! low-delay and baseline decoders ([`decoder`]), channel simulation
//! ([`pipeline`]) and file formats ([`formats`]). [`example`] rebuilds the
//! (5,3,2) example code and checks it end to end.

pub mod convcode;
pub mod decoder;
pub mod error;
pub mod example;
pub mod field;
pub mod formats;
pub mod matrix;
pub mod pattern;
pub mod pipeline;
pub mod poly;
pub mod rng;
pub mod sysrep;

pub use convcode::{CodeProfile, PolyGenerator};
pub use decoder::{
    DecodeReport, Decoder, DecoderConfig, DecoderKind, ErasureSymbol, Event, ReceivedStream, SymbolStatus,
};
pub use error::{Error, Result};
pub use field::{Fe, Field, FieldSpec};
pub use formats::CodeSpec;
pub use matrix::{Matrix, SolveOutcome, Unknown};
pub use pipeline::{Channel, ChannelModel, ExperimentConfig, Frame, TrialStats};
pub use rng::SplitMix64;
pub use sysrep::{QualityReport, StateSpace};
