//! Probabilistic amplitude shaping: Maxwell–Boltzmann amplitude priors,
//! constant-composition distribution matching and rate bookkeeping.

mod ccdm;
mod maxwell_boltzmann;

pub use ccdm::{Ccdm, CcdmConfig, ShapedFrame};
pub use maxwell_boltzmann::{find_nu_for_entropy, MbDistribution};

use serde::{Deserialize, Serialize};

/// Default CCDM block length in amplitudes.
pub const DEFAULT_BLOCK_LENGTH: usize = 216;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PasScheme {
    /// All labels bits coded, parity on the sign bits.
    BicmPs,
    /// Only the sign-level bits are soft-coded.
    MlcPs,
}

/// Information rate in bits per symbol of a shaped scheme.
///
/// `rate_loss` is the matcher loss in bits per amplitude; square QAM carries
/// two amplitudes and two sign-level bits per symbol.
pub fn pas_rate_check(
    scheme: PasScheme,
    entropy: f64,
    code_rate: f64,
    rate_loss: f64,
    bits_per_symbol: usize,
) -> f64 {
    let amplitudes_per_symbol = 2.0;
    let sign_bits_per_symbol = 2.0;
    let coded_bits = match scheme {
        PasScheme::BicmPs => bits_per_symbol as f64,
        PasScheme::MlcPs => sign_bits_per_symbol,
    };
    entropy - (1.0 - code_rate) * coded_bits - rate_loss * amplitudes_per_symbol
}
