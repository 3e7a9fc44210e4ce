//! Receiver performance metrics.

mod info;
mod lvalue;
mod qfactor;

pub use info::{analytic_operating_point, mi_bitwise, mi_symbolwise, mi_unquantized, AnalyticPoint};
pub use lvalue::{asi_from_lvalues, gmi_from_ngmi, ngmi_from_lvalues, AsiAccumulator};
pub use qfactor::{j_eval, j_inverse, q_asi, q_ber, QFactor};

use serde::Serialize;

/// Every scalar metric of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub snr_tr_db: f64,
    pub snr_aux_db: f64,
    pub relative_snr_db: f64,
    pub frames: u64,
    pub total_bits: u64,
    pub ber_pre: f64,
    pub ser: f64,
    pub asi: f64,
    pub ngmi: f64,
    pub gmi: f64,
    pub mi_bits: f64,
    pub q_ber_db: f64,
    pub q_asi_db: f64,
    pub ber_post: f64,
    pub ber_e2e: f64,
}

impl MetricsReport {
    /// Fills the Q-factors from `ber_pre` and `asi`.
    pub fn with_q_factors(mut self) -> Self {
        self.q_ber_db = q_ber(self.ber_pre.min(0.5)).map(|q| q.db).unwrap_or(f64::NAN);
        self.q_asi_db = q_asi(self.asi).map(|q| q.db).unwrap_or(f64::NAN);
        self
    }
}
