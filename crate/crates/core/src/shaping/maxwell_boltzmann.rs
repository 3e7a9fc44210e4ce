use crate::constellation::entropy_bits;
use crate::error::{Error, Result};

/// Maxwell–Boltzmann prior over the positive ASK amplitudes,
/// `p(a) ∝ exp(-nu a²)` on the odd-integer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MbDistribution {
    nu: f64,
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl MbDistribution {
    /// MB prior over the amplitudes `1, 3, ..., 2 * amplitudes - 1`.
    pub fn new(nu: f64, amplitudes: usize) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::config(format!("MB exponent must be finite and >= 0, got {nu}")));
        }
        if amplitudes == 0 {
            return Err(Error::config("MB support is empty"));
        }
        let support: Vec<f64> = (0..amplitudes).map(|a| (2 * a + 1) as f64).collect();
        // Shift by the smallest exponent so the largest weight is exactly 1.
        let a0 = support[0] * support[0];
        let weights: Vec<f64> = support.iter().map(|a| (-nu * (a * a - a0)).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        Ok(MbDistribution { nu, support, probs })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Amplitude entropy in bits.
    pub fn amplitude_entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    /// Entropy of the 2D symbol: two axes of uniform sign times amplitude.
    pub fn symbol_entropy(&self) -> f64 {
        2.0 * (1.0 + self.amplitude_entropy())
    }
}

/// Finds the MB exponent whose square-QAM symbol entropy equals `target`.
///
/// `order` is the square QAM order (16 or 64). The achievable range is
/// `(2, log2(order)]`: two uniform sign bits up to the uniform format.
pub fn find_nu_for_entropy(target: f64, order: usize) -> Result<MbDistribution> {
    if order != 16 && order != 64 {
        return Err(Error::config(format!("MB shaping needs square order 16 or 64, got {order}")));
    }
    let side = (order as f64).sqrt() as usize;
    let amplitudes = side / 2;
    let h_max = (order as f64).log2();
    if !(target > 2.0 && target <= h_max + 1e-12) {
        return Err(Error::config(format!(
            "symbol entropy {target} outside the achievable range (2, {h_max}]"
        )));
    }
    if target >= h_max - 1e-12 {
        return MbDistribution::new(0.0, amplitudes);
    }
    let entropy = |nu: f64| MbDistribution::new(nu, amplitudes).map(|d| d.symbol_entropy());
    let mut lo = 0.0;
    let mut hi = 0.01;
    while entropy(hi)? > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::config(format!("no MB exponent reaches entropy {target}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if entropy(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    MbDistribution::new(0.5 * (lo + hi), amplitudes)
}
