//! Constant-composition distribution matcher.
//!
//! The matcher is an arithmetic decoder driven by the exact, shrinking
//! composition model: at step `t` symbol `s` owns a sub-interval proportional
//! to its remaining count. With integer interval widths equal to the number
//! of completions of each prefix, the `k` input bits read as an integer `v`
//! select the `v`-th composition-consistent sequence in lexicographic order,
//! and dematching is the corresponding ranking. All arithmetic is exact on
//! big integers, so the map is bit-exact and invertible on its image.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::constellation::entropy_bits;
use crate::error::{Error, Result};

/// Block configuration: occurrence count of every amplitude per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcdmConfig {
    composition: Vec<usize>,
    block_length: usize,
    input_bits: usize,
}

impl CcdmConfig {
    pub fn new(composition: Vec<usize>) -> Result<Self> {
        if composition.is_empty() {
            return Err(Error::config("CCDM composition is empty"));
        }
        let block_length: usize = composition.iter().sum();
        if block_length == 0 {
            return Err(Error::config("CCDM block length is zero"));
        }
        let count = multinomial(&composition);
        // floor(log2(count)) = bit length - 1
        let input_bits = (count.bits() - 1) as usize;
        Ok(CcdmConfig {
            composition,
            block_length,
            input_bits,
        })
    }

    /// Composition closest to `probs` for a block of `block_length`
    /// amplitudes, by largest-remainder rounding.
    pub fn from_distribution(probs: &[f64], block_length: usize) -> Result<Self> {
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::config("distribution has negative entries"));
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return Err(Error::config("distribution has no mass"));
        }
        let ideal: Vec<f64> = probs
            .iter()
            .map(|p| p / total * block_length as f64)
            .collect();
        let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
        let mut remaining = block_length - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..probs.len()).collect();
        // Ties go to the lower amplitude index.
        order.sort_by(|&a, &b| {
            let ra = ideal[a] - ideal[a].floor();
            let rb = ideal[b] - ideal[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            counts[i] += 1;
            remaining -= 1;
        }
        Self::new(counts)
    }

    pub fn composition(&self) -> &[usize] {
        &self.composition
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// Bits consumed per block, `floor(log2(multinomial))`.
    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    /// Empirical amplitude distribution of one block.
    pub fn distribution(&self) -> Vec<f64> {
        self.composition
            .iter()
            .map(|&c| c as f64 / self.block_length as f64)
            .collect()
    }

    /// `H(composition) - k / n` in bits per amplitude; never negative.
    pub fn rate_loss(&self) -> f64 {
        (entropy_bits(&self.distribution()) - self.input_bits as f64 / self.block_length as f64)
            .max(0.0)
    }
}

fn multinomial(counts: &[usize]) -> BigUint {
    let mut result = BigUint::one();
    let mut placed = 0usize;
    for &c in counts {
        // result *= C(placed + c, c), built incrementally so every division is exact.
        for j in 1..=c {
            result *= placed + j;
            result /= j;
        }
        placed += c;
    }
    result
}

/// Output of shaping one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedFrame {
    /// Source bits consumed by the matcher.
    pub source_bits: Vec<u8>,
    /// Amplitude indices, block after block.
    pub amplitudes: Vec<usize>,
    pub rate_loss: f64,
}

/// Result of dematching one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dematched {
    pub bits: Vec<u8>,
    /// The input was not a codeword; `bits` is a best-effort guess.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct Ccdm {
    config: CcdmConfig,
    total: BigUint,
}

impl Ccdm {
    pub fn new(config: CcdmConfig) -> Self {
        let total = multinomial(&config.composition);
        Ccdm { config, total }
    }

    pub fn config(&self) -> &CcdmConfig {
        &self.config
    }

    /// Maps exactly `input_bits` bits onto one block of amplitude indices.
    pub fn encode(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let k = self.config.input_bits;
        if bits.len() != k {
            return Err(Error::Length {
                expected: k,
                actual: bits.len(),
            });
        }
        let mut v = bits_to_integer(bits);
        let mut counts = self.config.composition.clone();
        let mut remaining = self.config.block_length;
        let mut width = self.total.clone();
        let mut out = Vec::with_capacity(remaining);
        while remaining > 0 {
            let mut chosen = None;
            for (s, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let sub = &width * c / remaining;
                if v < sub {
                    width = sub;
                    chosen = Some(s);
                    break;
                }
                v -= sub;
            }
            let s = chosen.expect("input integer lies inside the codebook");
            counts[s] -= 1;
            remaining -= 1;
            out.push(s);
        }
        Ok(out)
    }

    /// Inverse of [`Ccdm::encode`].
    ///
    /// Sequences outside the codebook (wrong length, wrong composition or a
    /// rank beyond `2^k`) are flagged. Dematching then continues with the
    /// nearest still-available amplitude at each position, and an
    /// out-of-range rank saturates at `2^k - 1`.
    pub fn decode(&self, amplitudes: &[usize]) -> Dematched {
        let n = self.config.block_length;
        let k = self.config.input_bits;
        let mut flagged = amplitudes.len() != n;
        let mut counts = self.config.composition.clone();
        let mut remaining = n;
        let mut width = self.total.clone();
        let mut rank = BigUint::zero();
        for t in 0..n {
            let observed = amplitudes.get(t).copied().unwrap_or(0);
            let s = if observed < counts.len() && counts[observed] > 0 {
                observed
            } else {
                flagged = true;
                nearest_available(&counts, observed)
            };
            for &c in counts.iter().take(s) {
                if c > 0 {
                    rank += &width * c / remaining;
                }
            }
            width = &width * counts[s] / remaining;
            counts[s] -= 1;
            remaining -= 1;
        }
        let limit = BigUint::one() << k;
        if rank >= limit {
            flagged = true;
            rank = limit - 1u32;
        }
        Dematched {
            bits: integer_to_bits(&rank, k),
            flagged,
        }
    }

    /// Shapes `blocks` consecutive blocks from `source` bits.
    pub fn encode_frame(&self, source: &[u8], blocks: usize) -> Result<ShapedFrame> {
        let k = self.config.input_bits;
        if source.len() != k * blocks {
            return Err(Error::Length {
                expected: k * blocks,
                actual: source.len(),
            });
        }
        let mut amplitudes = Vec::with_capacity(blocks * self.config.block_length);
        for chunk in 0..blocks {
            amplitudes.extend(self.encode(&source[chunk * k..(chunk + 1) * k])?);
        }
        Ok(ShapedFrame {
            source_bits: source.to_vec(),
            amplitudes,
            rate_loss: self.config.rate_loss(),
        })
    }

    /// Dematches a frame; returns the bits and the number of flagged blocks.
    pub fn decode_frame(&self, amplitudes: &[usize]) -> (Vec<u8>, usize) {
        let n = self.config.block_length;
        let mut bits = Vec::with_capacity(amplitudes.len() / n * self.config.input_bits);
        let mut flagged = 0;
        for block in amplitudes.chunks(n) {
            let d = self.decode(block);
            flagged += d.flagged as usize;
            bits.extend(d.bits);
        }
        (bits, flagged)
    }
}

fn nearest_available(counts: &[usize], observed: usize) -> usize {
    (0..counts.len())
        .filter(|&s| counts[s] > 0)
        .min_by_key(|&s| (s as i64 - observed as i64).unsigned_abs())
        .expect("at least one amplitude remains")
}

fn bits_to_integer(bits: &[u8]) -> BigUint {
    let mut v = BigUint::zero();
    for &b in bits {
        v <<= 1;
        if b & 1 == 1 {
            v += 1u32;
        }
    }
    v
}

fn integer_to_bits(v: &BigUint, k: usize) -> Vec<u8> {
    if k <= 64 {
        let x = v.to_u64().expect("fits");
        return (0..k).map(|i| ((x >> (k - 1 - i)) & 1) as u8).collect();
    }
    (0..k).map(|i| v.bit((k - 1 - i) as u64) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_inputs(k: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..(1u64 << k)).map(move |v| (0..k).map(|i| ((v >> (k - 1 - i)) & 1) as u8).collect())
    }

    #[test]
    fn single_amplitude_block_has_no_input() {
        let cfg = CcdmConfig::new(vec![8, 0, 0, 0]).unwrap();
        assert_eq!(cfg.input_bits(), 0);
        let ccdm = Ccdm::new(cfg);
        assert_eq!(ccdm.encode(&[]).unwrap(), vec![0; 8]);
        let d = ccdm.decode(&[0; 8]);
        assert!(d.bits.is_empty() && !d.flagged);
    }

    #[test]
    fn two_by_two_composition_enumerated() {
        let cfg = CcdmConfig::new(vec![2, 2]).unwrap();
        assert_eq!(cfg.input_bits(), 2); // floor(log2 6)
        let ccdm = Ccdm::new(cfg);
        // The six sequences in lexicographic order.
        let all = [
            [0, 0, 1, 1],
            [0, 1, 0, 1],
            [0, 1, 1, 0],
            [1, 0, 0, 1],
            [1, 0, 1, 0],
            [1, 1, 0, 0],
        ];
        let mut outputs = Vec::new();
        for (v, bits) in all_inputs(2).enumerate() {
            let out = ccdm.encode(&bits).unwrap();
            assert_eq!(out, all[v].to_vec());
            outputs.push(out.clone());
            let back = ccdm.decode(&out);
            assert_eq!(back.bits, bits);
            assert!(!back.flagged);
        }
        outputs.sort();
        outputs.dedup();
        assert_eq!(outputs.len(), 4);
        // Codebook members with rank >= 4 are valid compositions but unused.
        assert!(ccdm.decode(&[1, 1, 0, 0]).flagged);
    }

    #[test]
    fn single_flip_is_flagged() {
        let ccdm = Ccdm::new(CcdmConfig::new(vec![2, 2]).unwrap());
        for bits in all_inputs(2) {
            let seq = ccdm.encode(&bits).unwrap();
            for pos in 0..4 {
                let mut bad = seq.clone();
                bad[pos] ^= 1;
                let d = ccdm.decode(&bad);
                assert!(d.flagged);
                assert_eq!(d.bits.len(), 2);
            }
        }
    }

    #[test]
    fn exhaustive_roundtrip_up_to_twelve_bits() {
        for comp in [vec![3, 2, 2, 1], vec![4, 3, 2], vec![3, 3, 3], vec![2, 2, 2, 1, 1]] {
            let cfg = CcdmConfig::new(comp.clone()).unwrap();
            let k = cfg.input_bits();
            assert!(k <= 12, "{comp:?} has k = {k}");
            let ccdm = Ccdm::new(cfg);
            for bits in all_inputs(k) {
                let out = ccdm.encode(&bits).unwrap();
                let mut counts = vec![0; comp.len()];
                for &s in &out {
                    counts[s] += 1;
                }
                assert_eq!(counts, comp);
                let back = ccdm.decode(&out);
                assert_eq!(back.bits, bits);
                assert!(!back.flagged);
            }
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let ccdm = Ccdm::new(CcdmConfig::new(vec![2, 2]).unwrap());
        assert!(matches!(ccdm.encode(&[1]), Err(Error::Length { .. })));
        assert!(ccdm.decode(&[0, 1, 1]).flagged);
    }

    #[test]
    fn largest_remainder_preserves_length() {
        let cfg = CcdmConfig::from_distribution(&[0.4, 0.3, 0.2, 0.1], 216).unwrap();
        assert_eq!(cfg.composition().iter().sum::<usize>(), 216);
        let cfg = CcdmConfig::from_distribution(&[1.0 / 3.0; 3], 10).unwrap();
        assert_eq!(cfg.composition(), &[4, 3, 3]);
    }

    #[test]
    fn rate_loss_vanishes_with_block_length() {
        let p = [0.45, 0.3, 0.17, 0.08];
        let mut last = f64::INFINITY;
        for n in [27, 54, 108, 216, 432, 864, 1728] {
            let loss = CcdmConfig::from_distribution(&p, n).unwrap().rate_loss();
            assert!(loss >= 0.0);
            assert!(loss < last, "n = {n}: {loss} !< {last}");
            last = loss;
        }
        assert!(last < 0.01);
    }

    #[test]
    fn block_216_roundtrip() {
        let cfg = CcdmConfig::from_distribution(&[0.45, 0.3, 0.17, 0.08], 216).unwrap();
        let k = cfg.input_bits();
        assert!(k > 300);
        let ccdm = Ccdm::new(cfg);
        let bits: Vec<u8> = (0..k).map(|i| ((i * 7 + i / 3) % 2) as u8).collect();
        let out = ccdm.encode(&bits).unwrap();
        assert_eq!(ccdm.decode(&out).bits, bits);
    }

    proptest! {
        #[test]
        fn roundtrip_and_composition(comp in proptest::collection::vec(0usize..6, 2..5), seed in any::<u64>()) {
            prop_assume!(comp.iter().sum::<usize>() > 0);
            let cfg = CcdmConfig::new(comp.clone()).unwrap();
            let k = cfg.input_bits();
            let ccdm = Ccdm::new(cfg);
            let bits: Vec<u8> = (0..k).map(|i| ((seed.rotate_left(i as u32 % 64) ^ (i as u64 * 0x9e37)) & 1) as u8).collect();
            let out = ccdm.encode(&bits).unwrap();
            let mut counts = vec![0; comp.len()];
            for &s in &out { counts[s] += 1; }
            prop_assert_eq!(&counts, &comp);
            prop_assert_eq!(ccdm.decode(&out).bits, bits);
        }
    }
}
