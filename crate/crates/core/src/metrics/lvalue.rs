//! Estimators over symmetrized L-values.

use crate::demapper::LValueFrame;
use crate::error::{Error, Result};
use crate::math::{log2_1p_exp_neg, CompensatedSum};

/// Running sum of `log2(1 + exp(-L_a))` and sign errors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AsiAccumulator {
    loss: CompensatedSum,
    samples: u64,
    errors: u64,
}

impl AsiAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, l_a: f64) {
        self.loss.add(log2_1p_exp_neg(l_a));
        self.samples += 1;
        // L_a < 0 is a hard-decision error; L_a == 0 only when a 1 was sent.
        self.errors += (l_a < 0.0) as u64;
    }

    /// Adds an L-value together with the transmitted bit.
    #[inline]
    pub fn add_bit(&mut self, l: f64, bit: u8) {
        let l_a = if bit == 0 { l } else { -l };
        self.loss.add(log2_1p_exp_neg(l_a));
        self.samples += 1;
        self.errors += ((l < 0.0) as u8 != bit) as u64;
    }

    pub fn merge(&mut self, other: &AsiAccumulator) {
        self.loss.merge(&other.loss);
        self.samples += other.samples;
        self.errors += other.errors;
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn errors(&self) -> u64 {
        self.errors
    }

    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.samples.max(1) as f64
    }

    pub fn asi(&self) -> Result<f64> {
        if self.samples == 0 {
            return Err(Error::domain("ASI needs at least one L-value"));
        }
        Ok((1.0 - self.loss.value() / self.samples as f64).clamp(0.0, 1.0))
    }
}

/// `ASI = 1 - E[log2(1 + exp(-L_a))]`, clamped to `[0, 1]`.
pub fn asi_from_lvalues(l_a: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut acc = AsiAccumulator::new();
    for l in l_a {
        acc.add(l);
    }
    acc.asi()
}

/// Normalized GMI of a frame; the same estimator as [`asi_from_lvalues`].
pub fn ngmi_from_lvalues(frame: &LValueFrame) -> Result<f64> {
    asi_from_lvalues(frame.symmetrized())
}

/// GMI in bits per symbol from the normalized value.
pub fn gmi_from_ngmi(ngmi: f64, entropy: f64, bits_per_symbol: usize) -> f64 {
    entropy - bits_per_symbol as f64 * (1.0 - ngmi)
}
