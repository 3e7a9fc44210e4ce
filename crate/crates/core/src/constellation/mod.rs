//! QAM constellations with Gray (BICM) and set-partitioning (MLC) labelings.
//!
//! Points are normalized to unit average energy under the symbol prior, so a
//! channel SNR of `s` corresponds to a total complex noise variance `1/s`.
//!
//! Square constellations are products of two identically labeled ASK axes.
//! Each axis label has a *sign-like* first bit and `bits_per_axis - 1`
//! amplitude bits that are a function of `|x|` only, which is what lets a
//! distribution matcher drive the amplitude bits while the first bit stays
//! uniform:
//!
//! * Gray: binary-reflected Gray code of the position index. The first bit is
//!   the sign of the coordinate.
//! * Set partition: the first bit is the parity of the position index, so
//!   fixing it leaves every other ASK point (twice the minimum distance). The
//!   amplitude bits are the natural binary code of `(|x| - 1) / 2`.
//!
//! The 32- and 128-point cross constellations carry the fixed quasi-Gray
//! tables of [`cross_labels`].

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};

pub mod cross_labels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    Gray,
    SetPartition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub i: f64,
    pub q: f64,
}

impl Point {
    pub fn norm_sqr(&self) -> f64 {
        self.i * self.i + self.q * self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    InPhase,
    Quadrature,
    /// Cross constellations: the bit depends on both coordinates.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRole {
    /// Uniform bit that carries FEC parity in shaped and multilevel schemes.
    Sign,
    /// Bit determined by the coordinate magnitude.
    Amplitude,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitLevel {
    pub axis: Axis,
    pub role: BitRole,
}

/// Role and axis of every bit position of a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLevelMap {
    levels: Vec<BitLevel>,
}

impl BitLevelMap {
    pub fn levels(&self) -> &[BitLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Bit positions with the given role, in label order.
    pub fn positions(&self, role: BitRole) -> Vec<usize> {
        (0..self.levels.len())
            .filter(|&k| self.levels[k].role == role)
            .collect()
    }
}

/// Labeling of one ASK axis of a square constellation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisLayout {
    levels: usize,
    bits: usize,
    label_of_position: Vec<u32>,
    position_of_label: Vec<usize>,
}

impl AxisLayout {
    fn new(levels: usize, labeling: Labeling) -> Self {
        let bits = levels.trailing_zeros() as usize;
        let label_of_position: Vec<u32> = (0..levels)
            .map(|p| match labeling {
                Labeling::Gray => (p ^ (p >> 1)) as u32,
                Labeling::SetPartition => {
                    let amp_index = amplitude_index(p, levels) as u32;
                    (((p & 1) as u32) << (bits - 1)) | amp_index
                }
            })
            .collect();
        let mut position_of_label = vec![usize::MAX; levels];
        for (p, &l) in label_of_position.iter().enumerate() {
            position_of_label[l as usize] = p;
        }
        debug_assert!(position_of_label.iter().all(|&p| p != usize::MAX));
        AxisLayout {
            levels,
            bits,
            label_of_position,
            position_of_label,
        }
    }

    /// ASK levels per axis.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn amplitudes(&self) -> usize {
        self.levels / 2
    }

    /// Unnormalized coordinate `2p - (L - 1)` of a position.
    pub fn coordinate(&self, position: usize) -> f64 {
        (2 * position) as f64 - (self.levels - 1) as f64
    }

    pub fn label(&self, position: usize) -> u32 {
        self.label_of_position[position]
    }

    pub fn position(&self, label: u32) -> usize {
        self.position_of_label[label as usize]
    }

    pub fn sign_bit(&self, position: usize) -> u8 {
        (self.label(position) >> (self.bits - 1)) as u8 & 1
    }

    /// Index `a` of the magnitude `2a + 1`.
    pub fn amplitude_index(&self, position: usize) -> usize {
        amplitude_index(position, self.levels)
    }

    /// Amplitude bits of an amplitude index (the label without its first bit).
    pub fn amplitude_label(&self, amp_index: usize) -> u32 {
        // Both positions with this magnitude share the amplitude bits.
        let p = self.levels / 2 + amp_index;
        self.label(p) & ((1 << (self.bits - 1)) - 1)
    }

    /// Inverse of [`AxisLayout::amplitude_label`].
    pub fn amplitude_from_label(&self, amp_label: u32) -> usize {
        let p = self.position(amp_label | (1 << (self.bits - 1)));
        let q = self.position(amp_label);
        debug_assert_eq!(self.amplitude_index(p), self.amplitude_index(q));
        self.amplitude_index(p)
    }

    /// Position carrying the given first bit and amplitude index.
    pub fn position_for(&self, sign_bit: u8, amp_index: usize) -> usize {
        let label = ((sign_bit as u32) << (self.bits - 1)) | self.amplitude_label(amp_index);
        self.position(label)
    }
}

fn amplitude_index(position: usize, levels: usize) -> usize {
    let x = 2 * position as i64 - (levels as i64 - 1);
    ((x.unsigned_abs() - 1) / 2) as usize
}

/// A (possibly shaped) QAM format: points, bit labels and symbol prior.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Point>,
    raw_points: Vec<(i32, i32)>,
    labels: Vec<u32>,
    symbol_of_label: Vec<usize>,
    prior: Vec<f64>,
    labeling: Labeling,
    levels: BitLevelMap,
    axis: Option<AxisLayout>,
    amplitude_prior: Option<Vec<f64>>,
    scale: f64,
}

impl ConstellationSpec {
    /// Uniform QAM of order 16, 32, 64 or 128.
    pub fn uniform_qam(order: usize, labeling: Labeling) -> Result<Self> {
        match order {
            16 | 64 => {
                let side = (order as f64).sqrt() as usize;
                let amp = vec![1.0 / (side / 2) as f64; side / 2];
                Self::square(order, labeling, amp, false)
            }
            32 | 128 => {
                if labeling != Labeling::Gray {
                    return Err(Error::config(format!(
                        "{order}-QAM is a cross constellation; only gray labeling is defined"
                    )));
                }
                let table: &[(i8, i8, u8)] = if order == 32 {
                    &cross_labels::CROSS32
                } else {
                    &cross_labels::CROSS128
                };
                Self::cross(order, table)
            }
            _ => Err(Error::config(format!(
                "unsupported QAM order {order} (expected 16, 32, 64 or 128)"
            ))),
        }
    }

    /// Shaped 64-QAM: per-axis amplitude prior over `{1, 3, 5, 7}`, uniform
    /// sign-like bits.
    pub fn shaped_qam64(amplitude_prior: &[f64], labeling: Labeling) -> Result<Self> {
        Self::shaped_square(64, amplitude_prior, labeling)
    }

    /// Shaped square QAM (16 or 64) with the given per-axis amplitude prior.
    pub fn shaped_square(order: usize, amplitude_prior: &[f64], labeling: Labeling) -> Result<Self> {
        if order != 16 && order != 64 {
            return Err(Error::config(format!(
                "shaping is defined for square orders 16 and 64, got {order}"
            )));
        }
        let side = (order as f64).sqrt() as usize;
        if amplitude_prior.len() != side / 2 {
            return Err(Error::config(format!(
                "{order}-QAM needs {} amplitude probabilities, got {}",
                side / 2,
                amplitude_prior.len()
            )));
        }
        if amplitude_prior.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::config("amplitude probabilities must be finite and nonnegative"));
        }
        let total: f64 = amplitude_prior.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "amplitude prior sums to {total}, expected 1"
            )));
        }
        let amp: Vec<f64> = amplitude_prior.iter().map(|p| p / total).collect();
        Self::square(order, labeling, amp, true)
    }

    fn square(order: usize, labeling: Labeling, amp: Vec<f64>, shaped: bool) -> Result<Self> {
        let side = (order as f64).sqrt() as usize;
        let axis = AxisLayout::new(side, labeling);
        let bpa = axis.bits();
        let m = 2 * bpa;
        let mut raw_points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        let mut prior = Vec::with_capacity(order);
        for pi in 0..side {
            for pq in 0..side {
                raw_points.push((axis.coordinate(pi) as i32, axis.coordinate(pq) as i32));
                labels.push((axis.label(pi) << bpa) | axis.label(pq));
                // Sign-like bit uniform: each magnitude has two positions.
                let pa = 0.5 * amp[axis.amplitude_index(pi)];
                let pb = 0.5 * amp[axis.amplitude_index(pq)];
                prior.push(pa * pb);
            }
        }
        let levels = (0..m)
            .map(|k| BitLevel {
                axis: if k < bpa { Axis::InPhase } else { Axis::Quadrature },
                role: if k % bpa == 0 {
                    BitRole::Sign
                } else {
                    BitRole::Amplitude
                },
            })
            .collect();
        Self::finish(
            order,
            m,
            raw_points,
            labels,
            prior,
            labeling,
            BitLevelMap { levels },
            Some(axis),
            shaped.then_some(amp),
        )
    }

    fn cross(order: usize, table: &[(i8, i8, u8)]) -> Result<Self> {
        let m = order.trailing_zeros() as usize;
        let raw_points = table.iter().map(|&(i, q, _)| (i as i32, q as i32)).collect();
        let labels = table.iter().map(|&(_, _, l)| l as u32).collect();
        let prior = vec![1.0 / order as f64; order];
        let levels = (0..m)
            .map(|_| BitLevel {
                axis: Axis::Both,
                role: BitRole::Joint,
            })
            .collect();
        Self::finish(
            order,
            m,
            raw_points,
            labels,
            prior,
            Labeling::Gray,
            BitLevelMap { levels },
            None,
            None,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        order: usize,
        m: usize,
        raw_points: Vec<(i32, i32)>,
        labels: Vec<u32>,
        prior: Vec<f64>,
        labeling: Labeling,
        levels: BitLevelMap,
        axis: Option<AxisLayout>,
        amplitude_prior: Option<Vec<f64>>,
    ) -> Result<Self> {
        let mut symbol_of_label = vec![usize::MAX; order];
        for (s, &l) in labels.iter().enumerate() {
            let slot = symbol_of_label
                .get_mut(l as usize)
                .ok_or_else(|| Error::config(format!("label {l} out of range")))?;
            if *slot != usize::MAX {
                return Err(Error::config(format!("duplicate label {l}")));
            }
            *slot = s;
        }
        let energy: f64 = raw_points
            .iter()
            .zip(&prior)
            .map(|(&(i, q), p)| p * ((i * i + q * q) as f64))
            .sum();
        let scale = 1.0 / energy.sqrt();
        let points = raw_points
            .iter()
            .map(|&(i, q)| Point {
                i: i as f64 * scale,
                q: q as f64 * scale,
            })
            .collect();
        Ok(ConstellationSpec {
            order,
            bits_per_symbol: m,
            points,
            raw_points,
            labels,
            symbol_of_label,
            prior,
            labeling,
            levels,
            axis,
            amplitude_prior,
            scale,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, symbol: usize) -> Point {
        self.points[symbol]
    }

    /// Odd-integer grid coordinates before normalization.
    pub fn raw_point(&self, symbol: usize) -> (i32, i32) {
        self.raw_points[symbol]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, symbol: usize) -> u32 {
        self.labels[symbol]
    }

    /// Bit `k` of a symbol's label, `k = 0` being the first (leftmost) bit.
    #[inline]
    pub fn bit(&self, symbol: usize, k: usize) -> u8 {
        ((self.labels[symbol] >> (self.bits_per_symbol - 1 - k)) & 1) as u8
    }

    /// Symbol carrying a label.
    pub fn symbol_of_label(&self, label: u32) -> usize {
        self.symbol_of_label[label as usize]
    }

    pub fn label_string(&self, symbol: usize) -> String {
        (0..self.bits_per_symbol)
            .map(|k| if self.bit(symbol, k) == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn labeling(&self) -> Labeling {
        self.labeling
    }

    pub fn bit_levels(&self) -> &BitLevelMap {
        &self.levels
    }

    /// Axis labeling for square constellations; `None` for cross formats.
    pub fn axis(&self) -> Option<&AxisLayout> {
        self.axis.as_ref()
    }

    /// Per-axis amplitude prior of a shaped constellation.
    pub fn amplitude_prior(&self) -> Option<&[f64]> {
        self.amplitude_prior.as_deref()
    }

    pub fn is_uniform(&self) -> bool {
        let p0 = self.prior[0];
        self.prior.iter().all(|&p| p == p0)
    }

    /// Factor mapping the odd-integer grid onto unit-energy coordinates.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn average_energy(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.prior)
            .map(|(x, p)| p * x.norm_sqr())
            .sum()
    }

    pub fn max_abs_coordinate(&self) -> f64 {
        self.points
            .iter()
            .map(|x| x.i.abs().max(x.q.abs()))
            .fold(0.0, f64::max)
    }

    /// Symbol at `(axis position I, axis position Q)` of a square format.
    pub fn square_symbol(&self, pos_i: usize, pos_q: usize) -> usize {
        let side = self.axis.as_ref().expect("square constellation").levels();
        pos_i * side + pos_q
    }

    /// Symbol of the point `-x` (all formats here are symmetric).
    pub fn mirror_symbol(&self, symbol: usize) -> usize {
        let (i, q) = self.raw_points[symbol];
        self.raw_points
            .iter()
            .position(|&p| p == (-i, -q))
            .expect("constellation is point-symmetric")
    }

    /// Entropy `H(X)` of the symbol prior in bits.
    pub fn symbol_entropy(&self) -> f64 {
        entropy_bits(&self.prior)
    }

    /// CSV export: `index,i,q,prior,label`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "i", "q", "prior", "label"])?;
        for s in 0..self.order {
            let x = self.points[s];
            w.write_record([
                s.to_string(),
                format!("{}", x.i),
                format!("{}", x.q),
                format!("{}", self.prior[s]),
                self.label_string(s),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Entropy in bits of a probability vector.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}
