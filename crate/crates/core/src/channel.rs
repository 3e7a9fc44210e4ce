//! Quantized AWGN channel: a per-dimension uniform ADC applied to a
//! Gaussian channel, both as an exact discrete memoryless channel and as a
//! sampler.
//!
//! The in-phase and quadrature outputs are quantized independently, so the
//! channel is the product of two identical one-dimensional DMCs whose inputs
//! are the distinct axis coordinates of the constellation.

use rand::Rng;

use crate::constellation::ConstellationSpec;
use crate::error::{Error, Result};
use crate::math::ln_normal_interval;

pub const DEFAULT_QUANTIZER_BITS: u32 = 7;
/// Clipping range beyond the outermost coordinate, in units of the complex
/// noise standard deviation.
pub const DEFAULT_RANGE_SIGMAS: f64 = 4.0;

/// Per-dimension quantizer with `2^bits` bins: `2^bits - 2` uniform bins over
/// `[-range, range]` and one unbounded overload bin on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    bits: u32,
    range: f64,
    edges: Vec<f64>,
}

impl Quantizer {
    pub fn new(bits: u32, range: f64) -> Result<Self> {
        if !(3..=10).contains(&bits) {
            return Err(Error::config(format!("quantizer bits must be in 3..=10, got {bits}")));
        }
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::config(format!("quantizer range must be positive, got {range}")));
        }
        let inner = (1usize << bits) - 2;
        let half = inner / 2;
        // Built from the centre outwards so the grid is exactly mirrored.
        let mut edges = vec![0.0; inner + 1];
        for j in 1..=half {
            let e = range * j as f64 / half as f64;
            edges[half + j] = e;
            edges[half - j] = -e;
        }
        Ok(Quantizer { bits, range, edges })
    }

    /// Quantizer for a constellation whose largest coordinate is `max_abs`
    /// observed at complex noise variance `sigma2`.
    pub fn for_channel(max_abs: f64, sigma2: f64, bits: u32, range_sigmas: f64) -> Result<Self> {
        Quantizer::new(bits, max_abs + range_sigmas * sigma2.sqrt())
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn bins(&self) -> usize {
        1 << self.bits
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn step(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// Interior bin edges, ascending; bin `b` is `(edges[b-1], edges[b]]`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn lower(&self, bin: usize) -> f64 {
        if bin == 0 {
            f64::NEG_INFINITY
        } else {
            self.edges[bin - 1]
        }
    }

    pub fn upper(&self, bin: usize) -> f64 {
        self.edges.get(bin).copied().unwrap_or(f64::INFINITY)
    }

    pub fn bin_of(&self, y: f64) -> usize {
        self.edges.partition_point(|&e| e < y)
    }

    /// Bin centre; the overload bins use the point half a step beyond the
    /// clipping range.
    pub fn representative(&self, bin: usize) -> f64 {
        let last = self.bins() - 1;
        let half_step = 0.5 * self.step();
        if bin == 0 {
            -self.range - half_step
        } else if bin == last {
            self.range + half_step
        } else {
            0.5 * (self.edges[bin - 1] + self.edges[bin])
        }
    }

    /// Bin holding the negated values of `bin`.
    pub fn mirror(&self, bin: usize) -> usize {
        self.bins() - 1 - bin
    }
}

/// One received symbol: the quantizer bin of each dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelObservation {
    pub bin_i: u16,
    pub bin_q: u16,
}

impl ChannelObservation {
    /// Index into a joint `bins x bins` table.
    #[inline]
    pub fn joint(&self, bins: usize) -> usize {
        self.bin_i as usize * bins + self.bin_q as usize
    }
}

/// Exact quantized-Gaussian channel at one SNR.
#[derive(Debug, Clone)]
pub struct DmcModel {
    snr_db: f64,
    sigma2: f64,
    quantizer: Quantizer,
    levels: Vec<f64>,
    symbol_levels: Vec<(u16, u16)>,
    rows: Vec<f64>,
    ln_rows: Vec<f64>,
    cdf: Vec<f64>,
}

pub fn noise_variance(snr_db: f64) -> Result<f64> {
    let sigma2 = 10f64.powf(-snr_db / 10.0);
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::config(format!("SNR {snr_db} dB has no positive finite linear value")));
    }
    Ok(sigma2)
}

impl DmcModel {
    /// Channel with its own quantizer sized for this SNR.
    pub fn build(spec: &ConstellationSpec, snr_db: f64, bits: u32) -> Result<Self> {
        Self::build_with_range(spec, snr_db, bits, DEFAULT_RANGE_SIGMAS)
    }

    pub fn build_with_range(
        spec: &ConstellationSpec,
        snr_db: f64,
        bits: u32,
        range_sigmas: f64,
    ) -> Result<Self> {
        let sigma2 = noise_variance(snr_db)?;
        let quantizer = Quantizer::for_channel(spec.max_abs_coordinate(), sigma2, bits, range_sigmas)?;
        Self::on_grid(spec, snr_db, quantizer)
    }

    /// Channel at `snr_db` observed through an existing quantizer.
    pub fn on_grid(spec: &ConstellationSpec, snr_db: f64, quantizer: Quantizer) -> Result<Self> {
        let sigma2 = noise_variance(snr_db)?;
        let sigma_d = (sigma2 / 2.0).sqrt();
        let mut raw: Vec<i32> = (0..spec.order()).map(|s| spec.raw_point(s).0).collect();
        raw.sort_unstable();
        raw.dedup();
        let levels: Vec<f64> = raw.iter().map(|&r| r as f64 * spec.scale()).collect();
        let level_of = |r: i32| raw.binary_search(&r).expect("axis coordinate") as u16;
        let symbol_levels = (0..spec.order())
            .map(|s| {
                let (i, q) = spec.raw_point(s);
                (level_of(i), level_of(q))
            })
            .collect();

        let bins = quantizer.bins();
        let mut rows = Vec::with_capacity(levels.len() * bins);
        let mut ln_rows = Vec::with_capacity(levels.len() * bins);
        let mut cdf = Vec::with_capacity(levels.len() * bins);
        for &x in &levels {
            let ln_p: Vec<f64> = (0..bins)
                .map(|b| {
                    ln_normal_interval(
                        (quantizer.lower(b) - x) / sigma_d,
                        (quantizer.upper(b) - x) / sigma_d,
                    )
                })
                .collect();
            let p: Vec<f64> = ln_p.iter().map(|l| l.exp()).collect();
            let total: f64 = p.iter().sum();
            let ln_total = total.ln();
            let mut acc = 0.0;
            for (pb, lb) in p.iter().zip(&ln_p) {
                rows.push(pb / total);
                ln_rows.push(lb - ln_total);
                acc += pb / total;
                cdf.push(acc);
            }
        }
        Ok(DmcModel {
            snr_db,
            sigma2,
            quantizer,
            levels,
            symbol_levels,
            rows,
            ln_rows,
            cdf,
        })
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    /// Total complex noise variance.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    pub fn bins(&self) -> usize {
        self.quantizer.bins()
    }

    /// Distinct axis coordinates, ascending.
    pub fn axis_levels(&self) -> &[f64] {
        &self.levels
    }

    /// Axis-level indices `(I, Q)` of a symbol.
    #[inline]
    pub fn symbol_levels(&self, symbol: usize) -> (usize, usize) {
        let (i, q) = self.symbol_levels[symbol];
        (i as usize, q as usize)
    }

    /// `P(bin | level)` for one dimension.
    pub fn row(&self, level: usize) -> &[f64] {
        let b = self.bins();
        &self.rows[level * b..(level + 1) * b]
    }

    pub fn ln_row(&self, level: usize) -> &[f64] {
        let b = self.bins();
        &self.ln_rows[level * b..(level + 1) * b]
    }

    /// `ln P(obs | symbol)` of the product channel.
    #[inline]
    pub fn ln_transition(&self, symbol: usize, obs: ChannelObservation) -> f64 {
        let (li, lq) = self.symbol_levels(symbol);
        let b = self.bins();
        self.ln_rows[li * b + obs.bin_i as usize] + self.ln_rows[lq * b + obs.bin_q as usize]
    }

    #[inline]
    pub fn transition(&self, symbol: usize, obs: ChannelObservation) -> f64 {
        let (li, lq) = self.symbol_levels(symbol);
        let b = self.bins();
        self.rows[li * b + obs.bin_i as usize] * self.rows[lq * b + obs.bin_q as usize]
    }

    /// Draws one observation by inverse-CDF sampling of the two rows.
    pub fn sample<R: Rng + ?Sized>(&self, symbol: usize, rng: &mut R) -> ChannelObservation {
        let (li, lq) = self.symbol_levels(symbol);
        ChannelObservation {
            bin_i: self.sample_axis(li, rng) as u16,
            bin_q: self.sample_axis(lq, rng) as u16,
        }
    }

    fn sample_axis<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> usize {
        let b = self.bins();
        let cdf = &self.cdf[level * b..(level + 1) * b];
        let u: f64 = rng.random();
        cdf.partition_point(|&c| c <= u).min(b - 1)
    }
}
