//! LDPC codes and belief-propagation decoding.

mod code;
mod decoder;
mod dvbs2_r45;

pub use code::{CodeDefinition, CodeId};
pub use decoder::{estimate_preber_from_flips, DecodeOutcome, Decoder, DecoderMode};
