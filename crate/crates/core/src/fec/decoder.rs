//! Flooding belief-propagation decoder.
//!
//! Messages are kept per edge in check-major order. Each iteration recomputes
//! every check-to-variable message from the previous posteriors and then
//! rebuilds the posteriors from the channel values, so the schedule is a
//! plain two-phase flooding schedule.

use serde::{Deserialize, Serialize};

use super::CodeDefinition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    /// Exact tanh rule.
    #[default]
    SumProduct,
    /// Min-sum with a constant magnitude offset.
    OffsetMinSum,
}

/// Largest check message magnitude; keeps `atanh` finite.
const MAX_CHECK_MESSAGE: f64 = 30.0;
const MIN_SUM_OFFSET: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Hard decisions on the full codeword.
    pub bits: Vec<u8>,
    pub iterations: usize,
    pub parity_satisfied: bool,
    /// Positions whose decoded bit disagrees with the sign of the input.
    pub flip_count: usize,
}

impl DecodeOutcome {
    /// Systematic part of the decoded codeword.
    pub fn payload(&self, k: usize) -> &[u8] {
        &self.bits[..k]
    }
}

/// Pre-FEC BER estimated from the decoder's bit flips.
pub fn estimate_preber_from_flips(outcome: &DecodeOutcome) -> f64 {
    outcome.flip_count as f64 / outcome.bits.len() as f64
}

/// Reusable decoder state for one code.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    code: &'a CodeDefinition,
    mode: DecoderMode,
    max_iterations: usize,
    c2v: Vec<f64>,
    post: Vec<f64>,
    next: Vec<f64>,
    scratch: Vec<f64>,
    hard: Vec<u8>,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a CodeDefinition, mode: DecoderMode) -> Self {
        let max_deg = (0..code.num_checks())
            .map(|c| code.check(c).len())
            .max()
            .unwrap_or(0);
        Decoder {
            code,
            mode,
            max_iterations: code.max_iterations(),
            c2v: vec![0.0; code.num_edges()],
            post: vec![0.0; code.n()],
            next: vec![0.0; code.n()],
            scratch: vec![0.0; 2 * max_deg + 2],
            hard: vec![0; code.n()],
        }
    }

    pub fn with_max_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = iterations;
        self
    }

    /// Decodes channel L-values (positive favours bit 0). Always returns an
    /// outcome; `parity_satisfied` reports convergence.
    pub fn decode(&mut self, llrs: &[f64]) -> DecodeOutcome {
        let code = self.code;
        assert_eq!(llrs.len(), code.n(), "one L-value per code bit");
        let input_hard: Vec<u8> = llrs.iter().map(|&l| (l < 0.0) as u8).collect();
        if code.syndrome_is_zero(&input_hard) {
            return DecodeOutcome {
                bits: input_hard,
                iterations: 0,
                parity_satisfied: true,
                flip_count: 0,
            };
        }
        self.post.copy_from_slice(llrs);
        self.c2v.iter_mut().for_each(|m| *m = 0.0);
        let mut iterations = 0;
        let mut satisfied = false;
        while iterations < self.max_iterations {
            iterations += 1;
            self.iterate(llrs);
            for (h, &p) in self.hard.iter_mut().zip(&self.post) {
                *h = (p < 0.0) as u8;
            }
            if code.syndrome_is_zero(&self.hard) {
                satisfied = true;
                break;
            }
        }
        let flip_count = self
            .hard
            .iter()
            .zip(&input_hard)
            .filter(|(a, b)| a != b)
            .count();
        DecodeOutcome {
            bits: self.hard.clone(),
            iterations,
            parity_satisfied: satisfied,
            flip_count,
        }
    }

    fn iterate(&mut self, llrs: &[f64]) {
        let ptr = self.code.check_ptr();
        let vars = self.code.check_vars();
        self.next.copy_from_slice(llrs);
        for c in 0..ptr.len() - 1 {
            let span = ptr[c] as usize..ptr[c + 1] as usize;
            let edge_vars = &vars[span.clone()];
            let msgs = &mut self.c2v[span];
            match self.mode {
                DecoderMode::SumProduct => {
                    sum_product_check(edge_vars, msgs, &self.post, &mut self.scratch)
                }
                DecoderMode::OffsetMinSum => offset_min_sum_check(edge_vars, msgs, &self.post),
            }
            for (&v, &m) in edge_vars.iter().zip(msgs.iter()) {
                self.next[v as usize] += m;
            }
        }
        std::mem::swap(&mut self.post, &mut self.next);
    }
}

#[inline]
fn sum_product_check(vars: &[u32], msgs: &mut [f64], post: &[f64], scratch: &mut [f64]) {
    let d = vars.len();
    let (t, prefix) = scratch.split_at_mut(d);
    for (i, (&v, &m)) in vars.iter().zip(msgs.iter()).enumerate() {
        let x = post[v as usize] - m;
        // tanh(|x|/2) = (1 - e^{-|x|}) / (1 + e^{-|x|})
        let e = (-x.abs()).exp();
        t[i] = if x < 0.0 { -(1.0 - e) / (1.0 + e) } else { (1.0 - e) / (1.0 + e) };
    }
    // Exclusive products from prefix and suffix runs.
    let mut acc = 1.0;
    for i in 0..d {
        prefix[i] = acc;
        acc *= t[i];
    }
    let mut suffix = 1.0;
    let limit = (MAX_CHECK_MESSAGE * 0.5).tanh();
    for i in (0..d).rev() {
        let p = (prefix[i] * suffix).clamp(-limit, limit);
        suffix *= t[i];
        // 2 atanh(p)
        msgs[i] = ((1.0 + p) / (1.0 - p)).ln();
    }
}

#[inline]
fn offset_min_sum_check(vars: &[u32], msgs: &mut [f64], post: &[f64]) {
    let mut min1 = f64::INFINITY;
    let mut min2 = f64::INFINITY;
    let mut arg = 0;
    let mut parity = false;
    let d = vars.len();
    let mut signs = [false; 64];
    debug_assert!(d <= 64);
    for i in 0..d {
        let x = post[vars[i] as usize] - msgs[i];
        let neg = x < 0.0;
        signs[i] = neg;
        parity ^= neg;
        let a = x.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            arg = i;
        } else if a < min2 {
            min2 = a;
        }
    }
    for i in 0..d {
        let mag = if i == arg { min2 } else { min1 };
        let mag = (mag - MIN_SUM_OFFSET).clamp(0.0, MAX_CHECK_MESSAGE);
        msgs[i] = if parity ^ signs[i] { -mag } else { mag };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fec::CodeDefinition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn bpsk_llrs(cw: &[u8], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let noise = Normal::new(0.0, sigma).unwrap();
        cw.iter()
            .map(|&b| {
                let x = if b == 0 { 1.0 } else { -1.0 };
                2.0 * (x + noise.sample(rng)) / (sigma * sigma)
            })
            .collect()
    }

    #[test]
    fn noiseless_input_needs_no_iterations() {
        let code = CodeDefinition::short_648();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let payload: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&payload).unwrap();
        let llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 20.0 } else { -20.0 }).collect();
        for mode in [DecoderMode::SumProduct, DecoderMode::OffsetMinSum] {
            let out = Decoder::new(&code, mode).decode(&llrs);
            assert_eq!(out.bits, cw);
            assert!(out.iterations <= 1);
            assert_eq!(out.flip_count, 0);
            assert_eq!(estimate_preber_from_flips(&out), 0.0);
        }
    }

    #[test]
    fn corrects_noise_and_counts_flips() {
        let code = CodeDefinition::short_648();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut dec = Decoder::new(&code, DecoderMode::SumProduct);
        for _ in 0..20 {
            let payload: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&payload).unwrap();
            // Eb/N0 ≈ 4 dB for rate 1/2: well above the waterfall.
            let llrs = bpsk_llrs(&cw, 0.63, &mut rng);
            let channel_errors = llrs
                .iter()
                .zip(&cw)
                .filter(|(&l, &b)| ((l < 0.0) as u8) != b)
                .count();
            let out = dec.decode(&llrs);
            assert!(out.parity_satisfied);
            assert_eq!(out.bits, cw);
            assert_eq!(out.flip_count, channel_errors);
        }
    }

    #[test]
    fn decoding_is_deterministic() {
        let code = CodeDefinition::short_648();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cw = code.encode(&vec![0; code.k()]).unwrap();
        let llrs = bpsk_llrs(&cw, 1.0, &mut rng);
        for mode in [DecoderMode::SumProduct, DecoderMode::OffsetMinSum] {
            let a = Decoder::new(&code, mode).decode(&llrs);
            let b = Decoder::new(&code, mode).decode(&llrs);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn hopeless_input_reports_failure() {
        let code = CodeDefinition::short_648();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cw = code.encode(&vec![0; code.k()]).unwrap();
        let llrs = bpsk_llrs(&cw, 3.0, &mut rng);
        let out = Decoder::new(&code, DecoderMode::SumProduct).decode(&llrs);
        assert!(!out.parity_satisfied);
        assert_eq!(out.iterations, 20);
        assert!(out.flip_count <= code.n());
    }

    #[test]
    fn min_sum_also_converges() {
        let code = CodeDefinition::short_648();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cw = code.encode(&vec![1; code.k()]).unwrap();
        let llrs = bpsk_llrs(&cw, 0.6, &mut rng);
        let out = Decoder::new(&code, DecoderMode::OffsetMinSum).decode(&llrs);
        assert!(out.parity_satisfied);
        assert_eq!(out.bits, cw);
    }
}
