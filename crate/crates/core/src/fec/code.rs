use serde::{Deserialize, Serialize};

use super::dvbs2_r45;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeId {
    /// DVB-S2 normal frame, n = 64800, rate 4/5.
    Dvbs2R45,
    /// Quasi-cyclic n = 648, rate 1/2 code for fast tests.
    Short648,
}

impl CodeId {
    pub fn build(self) -> CodeDefinition {
        match self {
            CodeId::Dvbs2R45 => CodeDefinition::dvbs2_r45(),
            CodeId::Short648 => CodeDefinition::short_648(),
        }
    }
}

/// 802.11n-style base matrix, Z = 27; `-1` marks an all-zero block, `s >= 0`
/// the identity cyclically shifted by `s`. Columns 12..24 form the
/// dual-diagonal parity part.
#[rustfmt::skip]
const SHORT_648_BASE: [[i8; 24]; 12] = [
    [ 0, -1, -1, -1,  0,  0, -1, -1,  0, -1, -1,  0,  1,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [22,  0, -1, -1, 17, -1,  0,  0, 12, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [ 6, -1,  0, -1, 10, -1, -1, -1, 24, -1,  0, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1],
    [ 2, -1, -1,  0, 20, -1, -1, -1, 25,  0, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1],
    [23, -1, -1, -1,  3, -1, -1, -1,  0, -1,  9, 11, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1],
    [24, -1, 23,  1, 17, -1,  3, -1, 10, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1],
    [25, -1, -1, -1,  8, -1, -1, -1,  7, 18, -1, -1,  0, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1],
    [13, 24, -1, -1,  0, -1,  8, -1,  6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1],
    [ 7, 20, -1, 16, 22, 10, -1, -1, 23, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1],
    [11, -1, -1, -1, 19, -1, -1, -1, 13, -1,  3, 17, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1],
    [25, -1,  8, -1, 23, 18, -1, 14,  9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0],
    [ 3, -1, -1, -1, 16, -1, -1,  2, 25,  5, -1, -1,  1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0],
];
const SHORT_648_Z: usize = 27;

#[derive(Debug, Clone)]
enum Encoder {
    /// IRA structure: information bit `j` feeds the listed parity
    /// accumulators, followed by a running XOR over the parity bits.
    Accumulate {
        info_ptr: Vec<u32>,
        info_checks: Vec<u32>,
    },
    /// Dense parity generator, one bit-packed row over the information bits
    /// per parity bit.
    Dense { rows: Vec<Vec<u64>> },
}

/// Binary LDPC code: parity-check structure, systematic encoder and the
/// decoder iteration budget. Codewords are `[information | parity]`.
#[derive(Debug, Clone)]
pub struct CodeDefinition {
    id: CodeId,
    n: usize,
    k: usize,
    max_iterations: usize,
    check_ptr: Vec<u32>,
    check_vars: Vec<u32>,
    encoder: Encoder,
}

impl CodeDefinition {
    pub fn dvbs2_r45() -> Self {
        let n = dvbs2_r45::N;
        let k = dvbs2_r45::K;
        let m = n - k;
        let q = dvbs2_r45::Q;
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut info_ptr = Vec::with_capacity(k + 1);
        let mut info_checks = Vec::new();
        info_ptr.push(0);
        for j in 0..k {
            let group = dvbs2_r45::ADDRESSES[j / 360];
            let w = j % 360;
            for &x in group {
                let c = (x as usize + w * q) % m;
                rows[c].push(j as u32);
                info_checks.push(c as u32);
            }
            info_ptr.push(info_checks.len() as u32);
        }
        // Accumulator: check c touches parity bits c - 1 and c.
        for (c, row) in rows.iter_mut().enumerate() {
            if c > 0 {
                row.push((k + c - 1) as u32);
            }
            row.push((k + c) as u32);
        }
        let (check_ptr, check_vars) = csr(&rows);
        CodeDefinition {
            id: CodeId::Dvbs2R45,
            n,
            k,
            max_iterations: 20,
            check_ptr,
            check_vars,
            encoder: Encoder::Accumulate {
                info_ptr,
                info_checks,
            },
        }
    }

    pub fn short_648() -> Self {
        let z = SHORT_648_Z;
        let n = 24 * z;
        let m = 12 * z;
        let k = n - m;
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (br, base_row) in SHORT_648_BASE.iter().enumerate() {
            for (bc, &shift) in base_row.iter().enumerate() {
                if shift < 0 {
                    continue;
                }
                for r in 0..z {
                    let col = bc * z + (r + shift as usize) % z;
                    rows[br * z + r].push(col as u32);
                }
            }
        }
        for row in rows.iter_mut() {
            row.sort_unstable();
        }
        let dense = dense_parity_generator(&rows, k, m)
            .expect("parity part of the short code is invertible");
        let (check_ptr, check_vars) = csr(&rows);
        CodeDefinition {
            id: CodeId::Short648,
            n,
            k,
            max_iterations: 20,
            check_ptr,
            check_vars,
            encoder: Encoder::Dense { rows: dense },
        }
    }

    pub fn id(&self) -> CodeId {
        self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_checks(&self) -> usize {
        self.n - self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn with_max_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = iterations;
        self
    }

    pub fn num_edges(&self) -> usize {
        self.check_vars.len()
    }

    /// Variable indices of check `c`.
    #[inline]
    pub fn check(&self, c: usize) -> &[u32] {
        &self.check_vars[self.check_ptr[c] as usize..self.check_ptr[c + 1] as usize]
    }

    pub(crate) fn check_ptr(&self) -> &[u32] {
        &self.check_ptr
    }

    pub(crate) fn check_vars(&self) -> &[u32] {
        &self.check_vars
    }

    /// Column degree of every variable node.
    pub fn variable_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &v in &self.check_vars {
            deg[v as usize] += 1;
        }
        deg
    }

    /// Systematic encoding: the first `k` bits of the codeword are `payload`.
    pub fn encode(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() != self.k {
            return Err(Error::Length {
                expected: self.k,
                actual: payload.len(),
            });
        }
        let m = self.n - self.k;
        let mut codeword = Vec::with_capacity(self.n);
        codeword.extend(payload.iter().map(|b| b & 1));
        match &self.encoder {
            Encoder::Accumulate {
                info_ptr,
                info_checks,
            } => {
                let mut parity = vec![0u8; m];
                for (j, &bit) in codeword.iter().enumerate() {
                    if bit == 1 {
                        let span = info_ptr[j] as usize..info_ptr[j + 1] as usize;
                        for &c in &info_checks[span] {
                            parity[c as usize] ^= 1;
                        }
                    }
                }
                for c in 1..m {
                    parity[c] ^= parity[c - 1];
                }
                codeword.extend(parity);
            }
            Encoder::Dense { rows } => {
                let packed = pack_bits(&codeword);
                for row in rows {
                    let ones: u32 = row
                        .iter()
                        .zip(&packed)
                        .map(|(a, b)| (a & b).count_ones())
                        .sum();
                    codeword.push((ones & 1) as u8);
                }
            }
        }
        Ok(codeword)
    }

    /// True when every parity check is satisfied by the hard bits.
    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        (0..self.num_checks()).all(|c| self.check(c).iter().fold(0u8, |a, &v| a ^ bits[v as usize]) == 0)
    }

    /// Number of unsatisfied checks.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        (0..self.num_checks())
            .filter(|&c| self.check(c).iter().fold(0u8, |a, &v| a ^ bits[v as usize]) != 0)
            .count()
    }
}

fn csr(rows: &[Vec<u32>]) -> (Vec<u32>, Vec<u32>) {
    let mut ptr = Vec::with_capacity(rows.len() + 1);
    let mut vars = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    ptr.push(0);
    for row in rows {
        vars.extend_from_slice(row);
        ptr.push(vars.len() as u32);
    }
    (ptr, vars)
}

fn pack_bits(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 64] |= (b as u64 & 1) << (i % 64);
    }
    out
}

/// Rows of `P = H_p^{-1} H_s` over GF(2), so that `parity = P · info`.
fn dense_parity_generator(rows: &[Vec<u32>], k: usize, m: usize) -> Option<Vec<Vec<u64>>> {
    let wi = k.div_ceil(64);
    let wp = m.div_ceil(64);
    // Augmented rows [H_p | H_s], each part bit-packed.
    let mut hp: Vec<Vec<u64>> = vec![vec![0; wp]; m];
    let mut hs: Vec<Vec<u64>> = vec![vec![0; wi]; m];
    for (r, row) in rows.iter().enumerate() {
        for &v in row {
            let v = v as usize;
            if v < k {
                hs[r][v / 64] ^= 1 << (v % 64);
            } else {
                let p = v - k;
                hp[r][p / 64] ^= 1 << (p % 64);
            }
        }
    }
    for col in 0..m {
        let pivot = (col..m).find(|&r| hp[r][col / 64] >> (col % 64) & 1 == 1)?;
        hp.swap(col, pivot);
        hs.swap(col, pivot);
        for r in 0..m {
            if r != col && hp[r][col / 64] >> (col % 64) & 1 == 1 {
                let (src_p, src_s) = (hp[col].clone(), hs[col].clone());
                for (a, b) in hp[r].iter_mut().zip(&src_p) {
                    *a ^= b;
                }
                for (a, b) in hs[r].iter_mut().zip(&src_s) {
                    *a ^= b;
                }
            }
        }
    }
    Some(hs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dvbs2_dimensions_and_degrees() {
        let code = CodeDefinition::dvbs2_r45();
        assert_eq!(code.n(), 64_800);
        assert_eq!(code.k(), 51_840);
        assert_eq!(code.max_iterations(), 20);
        let deg = code.variable_degrees();
        assert_eq!(deg[..6480].iter().filter(|&&d| d == 11).count(), 6480);
        assert!(deg[6480..51_840].iter().all(|&d| d == 3));
        assert!(deg[51_840..64_799].iter().all(|&d| d == 2));
        assert_eq!(deg[64_799], 1);
        // Rate-4/5 checks have degree 18 except the first (17).
        assert_eq!(code.check(0).len(), 17);
        assert!((1..code.num_checks()).all(|c| code.check(c).len() == 18));
    }

    #[test]
    fn short_code_dimensions() {
        let code = CodeDefinition::short_648();
        assert_eq!((code.n(), code.k()), (648, 324));
        assert!((code.rate() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_payload_gives_zero_codeword() {
        for code in [CodeDefinition::dvbs2_r45(), CodeDefinition::short_648()] {
            let cw = code.encode(&vec![0; code.k()]).unwrap();
            assert!(cw.iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn random_codewords_satisfy_checks_and_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for code in [CodeDefinition::dvbs2_r45(), CodeDefinition::short_648()] {
            let a: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let ca = code.encode(&a).unwrap();
            let cb = code.encode(&b).unwrap();
            assert_eq!(&ca[..code.k()], &a[..]);
            assert!(code.syndrome_is_zero(&ca));
            let sum: Vec<u8> = ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect();
            assert!(code.syndrome_is_zero(&sum));
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            assert_eq!(code.encode(&ab).unwrap(), sum);
        }
    }

    #[test]
    fn single_bit_error_breaks_syndrome() {
        let code = CodeDefinition::short_648();
        let mut cw = code.encode(&vec![1; code.k()]).unwrap();
        cw[100] ^= 1;
        assert!(!code.syndrome_is_zero(&cw));
        assert!(code.syndrome_weight(&cw) >= 1);
    }

    #[test]
    fn payload_length_checked() {
        let code = CodeDefinition::short_648();
        assert!(matches!(code.encode(&[0; 10]), Err(Error::Length { .. })));
    }
}
