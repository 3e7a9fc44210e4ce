//! Q-factor conversions and the J-function.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::math::{erfc_inv, gauss_hermite, log2_1p_exp_neg};

const J_NODES: usize = 100;
const J_SIGMA_MAX: f64 = 400.0;

fn nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_hermite(J_NODES))
}

/// Linear Q-factor and its dB value `20 log10(Q)`. Infinite values are the
/// sentinels for error-free (`+inf`) and zero-margin (`-inf` dB) inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QFactor {
    pub linear: f64,
    pub db: f64,
}

impl QFactor {
    fn from_linear(linear: f64) -> Self {
        QFactor {
            linear,
            db: 20.0 * linear.log10(),
        }
    }
}

/// `Q = sqrt(2) erfc^-1(2 BER)`.
pub fn q_ber(ber: f64) -> Result<QFactor> {
    if !(0.0..=0.5).contains(&ber) {
        return Err(Error::domain(format!("pre-FEC BER must lie in [0, 0.5], got {ber}")));
    }
    if ber == 0.0 {
        return Ok(QFactor::from_linear(f64::INFINITY));
    }
    if ber == 0.5 {
        return Ok(QFactor::from_linear(0.0));
    }
    Ok(QFactor::from_linear(std::f64::consts::SQRT_2 * erfc_inv(2.0 * ber)))
}

/// Mutual information of a binary input observed through consistent
/// Gaussian L-values `L ~ N(sigma^2/2, sigma^2)`.
pub fn j_eval(sigma: f64) -> f64 {
    assert!(sigma >= 0.0, "J is defined for sigma >= 0");
    if sigma == 0.0 {
        return 0.0;
    }
    let (t, w) = nodes();
    let mean = 0.5 * sigma * sigma;
    let scale = std::f64::consts::SQRT_2 * sigma;
    let e: f64 = t
        .iter()
        .zip(w)
        .map(|(&t, &w)| w * log2_1p_exp_neg(mean + scale * t))
        .sum::<f64>()
        / std::f64::consts::PI.sqrt();
    (1.0 - e).clamp(0.0, 1.0)
}

/// `J^-1` by bisection; `+inf` for `asi >= 1`.
pub fn j_inverse(asi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&asi) {
        return Err(Error::domain(format!("J^-1 needs a value in [0, 1], got {asi}")));
    }
    if asi == 0.0 {
        return Ok(0.0);
    }
    if asi >= j_eval(J_SIGMA_MAX) {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0, J_SIGMA_MAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j_eval(mid) < asi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Soft Q-factor `J^-1(ASI) / 2`; for consistent Gaussian L-values this
/// matches the hard Q-factor of the same channel.
pub fn q_asi(asi: f64) -> Result<QFactor> {
    Ok(QFactor::from_linear(j_inverse(asi)? / 2.0))
}
