//! Information measures and exact expectations over the DMC.

use crate::channel::{noise_variance, DmcModel};
use crate::constellation::ConstellationSpec;
use crate::demapper::LlrTable;
use crate::error::Result;
use crate::math::{gauss_hermite, log2_1p_exp_neg};

fn output_distribution(dmc: &DmcModel, prior: &[f64]) -> Vec<f64> {
    let b = dmc.bins();
    let mut py = vec![0.0; b * b];
    for (s, &p) in prior.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (li, lq) = dmc.symbol_levels(s);
        let (ri, rq) = (dmc.row(li), dmc.row(lq));
        for bi in 0..b {
            let pi = p * ri[bi];
            for bq in 0..b {
                py[bi * b + bq] += pi * rq[bq];
            }
        }
    }
    py
}

/// `I(X;Y)` of the product DMC in bits per symbol.
pub fn mi_symbolwise(dmc: &DmcModel, prior: &[f64]) -> f64 {
    let b = dmc.bins();
    let ln_py: Vec<f64> = output_distribution(dmc, prior).iter().map(|p| p.ln()).collect();
    let mut total = 0.0;
    for (s, &p) in prior.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (li, lq) = dmc.symbol_levels(s);
        let (ri, rq) = (dmc.row(li), dmc.row(lq));
        let (lri, lrq) = (dmc.ln_row(li), dmc.ln_row(lq));
        let mut acc = 0.0;
        for bi in 0..b {
            if ri[bi] == 0.0 {
                continue;
            }
            for bq in 0..b {
                let pyx = ri[bi] * rq[bq];
                if pyx > 0.0 {
                    acc += pyx * (lri[bi] + lrq[bq] - ln_py[bi * b + bq]);
                }
            }
        }
        total += p * acc;
    }
    (total / std::f64::consts::LN_2).max(0.0)
}

/// `I(B_k;Y)` for every bit level, in bits.
pub fn mi_bitwise(dmc: &DmcModel, spec: &ConstellationSpec) -> Vec<f64> {
    let b = dmc.bins();
    let m = spec.bits_per_symbol();
    let prior = spec.prior();
    let py = output_distribution(dmc, prior);
    (0..m)
        .map(|k| {
            let mut total = 0.0;
            for bit in 0..2u8 {
                let sub: Vec<f64> = (0..spec.order())
                    .map(|s| if spec.bit(s, k) == bit { prior[s] } else { 0.0 })
                    .collect();
                let pb: f64 = sub.iter().sum();
                if pb == 0.0 {
                    continue;
                }
                let pyb = output_distribution(dmc, &sub);
                for j in 0..b * b {
                    if pyb[j] > 0.0 {
                        total += pyb[j] * (pyb[j] / (pb * py[j])).ln();
                    }
                }
            }
            (total / std::f64::consts::LN_2).max(0.0)
        })
        .collect()
}

/// `I(X;Y)` of the unquantized complex AWGN channel by product Gauss–Hermite
/// quadrature with `nodes` points per dimension.
pub fn mi_unquantized(spec: &ConstellationSpec, snr_db: f64, nodes: usize) -> Result<f64> {
    let sigma2 = noise_variance(snr_db)?;
    let sigma = sigma2.sqrt();
    let (t, w) = gauss_hermite(nodes);
    let pts = spec.points();
    let prior = spec.prior();
    let ln_prior: Vec<f64> = prior.iter().map(|p| p.ln()).collect();
    let mut total = 0.0;
    let mut terms = vec![0.0; pts.len()];
    for (s, x) in pts.iter().enumerate() {
        if prior[s] == 0.0 {
            continue;
        }
        let mut e = 0.0;
        for (&ta, &wa) in t.iter().zip(&w) {
            for (&tb, &wb) in t.iter().zip(&w) {
                let (ni, nq) = (sigma * ta, sigma * tb);
                let n2 = ni * ni + nq * nq;
                let mut best = f64::NEG_INFINITY;
                for (u, xp) in pts.iter().enumerate() {
                    let di = x.i - xp.i + ni;
                    let dq = x.q - xp.q + nq;
                    let v = ln_prior[u] - (di * di + dq * dq - n2) / sigma2;
                    terms[u] = v;
                    best = best.max(v);
                }
                let lse = best + terms.iter().map(|v| (v - best).exp()).sum::<f64>().ln();
                e += wa * wb * lse;
            }
        }
        total += prior[s] * e / std::f64::consts::PI;
    }
    Ok((-total / std::f64::consts::LN_2).max(0.0))
}

/// Exact expectations of the receiver metrics over the true channel for a
/// given demapper table.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPoint {
    pub ber_pre: f64,
    pub ser: f64,
    pub asi: f64,
    pub ber_per_level: Vec<f64>,
    pub asi_per_level: Vec<f64>,
}

pub fn analytic_operating_point(
    spec: &ConstellationSpec,
    channel: &DmcModel,
    table: &LlrTable,
) -> AnalyticPoint {
    let b = channel.bins();
    let m = spec.bits_per_symbol();
    let mut err = vec![0.0; m];
    let mut loss = vec![0.0; m];
    let mut ser = 0.0;
    for s in 0..spec.order() {
        let p = spec.prior()[s];
        if p == 0.0 {
            continue;
        }
        let (li, lq) = channel.symbol_levels(s);
        let (ri, rq) = (channel.row(li), channel.row(lq));
        let bits: Vec<u8> = (0..m).map(|k| spec.bit(s, k)).collect();
        for bi in 0..b {
            let pi = p * ri[bi];
            if pi == 0.0 {
                continue;
            }
            for bq in 0..b {
                let w = pi * rq[bq];
                if w == 0.0 {
                    continue;
                }
                let j = bi * b + bq;
                let l = table.llrs_joint(j);
                for k in 0..m {
                    let la = if bits[k] == 0 { l[k] } else { -l[k] };
                    loss[k] += w * log2_1p_exp_neg(la);
                    if (l[k] < 0.0) as u8 != bits[k] {
                        err[k] += w;
                    }
                }
                if table.decision_joint(j) != s {
                    ser += w;
                }
            }
        }
    }
    let asi_per_level: Vec<f64> = loss.iter().map(|l| (1.0 - l).clamp(0.0, 1.0)).collect();
    AnalyticPoint {
        ber_pre: err.iter().sum::<f64>() / m as f64,
        ser,
        asi: (1.0 - loss.iter().sum::<f64>() / m as f64).clamp(0.0, 1.0),
        ber_per_level: err,
        asi_per_level,
    }
}
