//! Bitwise soft demapping under an auxiliary channel.
//!
//! Observations are pairs of quantizer bins, so every L-value the demapper
//! can produce is precomputed in a table indexed by the joint bin. Exact-MAP
//! tables use the auxiliary DMC rows; max-log tables use the Gaussian metric
//! `-|y - x|^2 / sigma^2` at the bin representatives, which scales exactly
//! with the auxiliary SNR.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelObservation, DmcModel, Quantizer};
use crate::constellation::ConstellationSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemapMode {
    #[default]
    ExactMap,
    MaxLog,
}

impl std::str::FromStr for DemapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-map" | "exact_map" => Ok(DemapMode::ExactMap),
            "max-log" | "max_log" => Ok(DemapMode::MaxLog),
            other => Err(Error::config(format!("unknown demapping mode '{other}'"))),
        }
    }
}

/// Channel law assumed by the receiver: a quantized Gaussian at `SNR_aux`
/// observed through the true channel's quantizer.
#[derive(Debug, Clone)]
pub struct AuxChannel {
    dmc: DmcModel,
}

impl AuxChannel {
    pub fn new(spec: &ConstellationSpec, snr_aux_db: f64, grid: &Quantizer) -> Result<Self> {
        Ok(AuxChannel {
            dmc: DmcModel::on_grid(spec, snr_aux_db, grid.clone())?,
        })
    }

    pub fn snr_db(&self) -> f64 {
        self.dmc.snr_db()
    }

    pub fn dmc(&self) -> &DmcModel {
        &self.dmc
    }
}

/// Clipping and uniform mid-rise quantization of L-values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrQuantizer {
    pub l_max: f64,
    /// `None` clips without quantizing.
    pub levels: Option<u32>,
}

impl Default for LlrQuantizer {
    fn default() -> Self {
        LlrQuantizer {
            l_max: 20.0,
            levels: Some(128),
        }
    }
}

impl LlrQuantizer {
    pub fn clip_only(l_max: f64) -> Self {
        LlrQuantizer { l_max, levels: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_max.is_finite() && self.l_max > 0.0) {
            return Err(Error::config(format!("L-value clip must be positive, got {}", self.l_max)));
        }
        if let Some(n) = self.levels {
            if n < 2 || n % 2 != 0 {
                return Err(Error::config(format!("L-value levels must be even and >= 2, got {n}")));
            }
        }
        Ok(())
    }

    pub fn step(&self) -> Option<f64> {
        self.levels.map(|n| 2.0 * self.l_max / n as f64)
    }

    /// Zero maps to the positive half-step.
    #[inline]
    pub fn apply(&self, l: f64) -> f64 {
        let c = if l.is_nan() { 0.0 } else { l.clamp(-self.l_max, self.l_max) };
        match self.levels {
            None => c,
            Some(n) => {
                let half = (n / 2) as f64;
                let step = 2.0 * self.l_max / n as f64;
                let idx = (c / step).floor().clamp(-half, half - 1.0);
                (idx + 0.5) * step
            }
        }
    }
}

/// Applies an L-value quantizer to a frame.
pub fn quantize_llrs(frame: &LValueFrame, quantizer: &LlrQuantizer) -> LValueFrame {
    LValueFrame {
        l: frame.l.iter().map(|&l| quantizer.apply(l)).collect(),
        bits: frame.bits.clone(),
    }
}

/// Bit decisions; ties go to bit 0.
pub fn hard_decide(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| (l < 0.0) as u8).collect()
}

/// Every L-value vector and MAP symbol decision of a demapper, indexed by
/// joint bin `bin_i * bins + bin_q`.
#[derive(Debug, Clone)]
pub struct LlrTable {
    bins: usize,
    bits_per_symbol: usize,
    values: Vec<f64>,
    decisions: Vec<u16>,
}

impl LlrTable {
    pub fn build(spec: &ConstellationSpec, aux: &AuxChannel, mode: DemapMode) -> Self {
        Self::build_restricted(spec, aux, mode, &(0..spec.order()).collect::<Vec<_>>())
    }

    fn build_restricted(
        spec: &ConstellationSpec,
        aux: &AuxChannel,
        mode: DemapMode,
        symbols: &[usize],
    ) -> Self {
        let dmc = aux.dmc();
        let bins = dmc.bins();
        let m = spec.bits_per_symbol();
        let levels = dmc.axis_levels().len();
        let inv = 1.0 / dmc.sigma2();
        // Per-axis term indexed [level][bin]: the log row for exact MAP, the
        // squared distance to the bin representative for max-log.
        let axis_term: Vec<f64> = match mode {
            DemapMode::ExactMap => (0..levels).flat_map(|l| dmc.ln_row(l).to_vec()).collect(),
            DemapMode::MaxLog => {
                let q = dmc.quantizer();
                dmc.axis_levels()
                    .iter()
                    .flat_map(|&x| {
                        (0..bins).map(move |b| {
                            let d = q.representative(b) - x;
                            d * d
                        })
                    })
                    .collect()
            }
        };
        let ln_prior: Vec<f64> = symbols.iter().map(|&s| spec.prior()[s].ln()).collect();
        let uniform = ln_prior.iter().all(|&p| p == ln_prior[0]);
        let sym_levels: Vec<(usize, usize)> = symbols.iter().map(|&s| dmc.symbol_levels(s)).collect();
        let labels: Vec<u32> = symbols.iter().map(|&s| spec.label(s)).collect();

        let mut values = vec![0.0; bins * bins * m];
        let mut decisions = vec![0u16; bins * bins];
        let mut metric = vec![0.0; symbols.len()];
        for bi in 0..bins {
            for bq in 0..bins {
                let j = bi * bins + bq;
                let out = &mut values[j * m..(j + 1) * m];
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                match mode {
                    DemapMode::ExactMap => {
                        for (t, &(li, lq)) in sym_levels.iter().enumerate() {
                            let v = ln_prior[t] + axis_term[li * bins + bi] + axis_term[lq * bins + bq];
                            metric[t] = v;
                            if v > best {
                                best = v;
                                arg = t;
                            }
                        }
                        let mut num = [0.0f64; 8];
                        let mut den = [0.0f64; 8];
                        for (t, &v) in metric.iter().enumerate() {
                            let w = (v - best).exp();
                            let label = labels[t];
                            for k in 0..m {
                                if (label >> (m - 1 - k)) & 1 == 0 {
                                    num[k] += w;
                                } else {
                                    den[k] += w;
                                }
                            }
                        }
                        for k in 0..m {
                            out[k] = num[k].ln() - den[k].ln();
                        }
                    }
                    DemapMode::MaxLog if uniform => {
                        // The SNR enters only as the final factor, so signs
                        // and ties do not depend on it.
                        let mut near0 = [f64::INFINITY; 8];
                        let mut near1 = [f64::INFINITY; 8];
                        let mut nearest = f64::INFINITY;
                        for (t, &(li, lq)) in sym_levels.iter().enumerate() {
                            let d = axis_term[li * bins + bi] + axis_term[lq * bins + bq];
                            if d < nearest {
                                nearest = d;
                                arg = t;
                            }
                            let label = labels[t];
                            for k in 0..m {
                                if (label >> (m - 1 - k)) & 1 == 0 {
                                    near0[k] = near0[k].min(d);
                                } else {
                                    near1[k] = near1[k].min(d);
                                }
                            }
                        }
                        for k in 0..m {
                            out[k] = (near1[k] - near0[k]) * inv;
                        }
                    }
                    DemapMode::MaxLog => {
                        let mut best0 = [f64::NEG_INFINITY; 8];
                        let mut best1 = [f64::NEG_INFINITY; 8];
                        for (t, &(li, lq)) in sym_levels.iter().enumerate() {
                            let d = axis_term[li * bins + bi] + axis_term[lq * bins + bq];
                            let v = ln_prior[t] - d * inv;
                            if v > best {
                                best = v;
                                arg = t;
                            }
                            let label = labels[t];
                            for k in 0..m {
                                if (label >> (m - 1 - k)) & 1 == 0 {
                                    best0[k] = best0[k].max(v);
                                } else {
                                    best1[k] = best1[k].max(v);
                                }
                            }
                        }
                        for k in 0..m {
                            out[k] = best0[k] - best1[k];
                        }
                    }
                }
                decisions[j] = symbols[arg] as u16;
            }
        }
        LlrTable {
            bins,
            bits_per_symbol: m,
            values,
            decisions,
        }
    }

    /// Copy with every entry passed through `quantizer`.
    pub fn processed(&self, quantizer: &LlrQuantizer) -> Self {
        LlrTable {
            values: self.values.iter().map(|&l| quantizer.apply(l)).collect(),
            ..self.clone()
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    #[inline]
    pub fn llrs(&self, obs: ChannelObservation) -> &[f64] {
        let j = obs.joint(self.bins);
        &self.values[j * self.bits_per_symbol..(j + 1) * self.bits_per_symbol]
    }

    #[inline]
    pub fn llrs_joint(&self, joint: usize) -> &[f64] {
        &self.values[joint * self.bits_per_symbol..(joint + 1) * self.bits_per_symbol]
    }

    /// MAP symbol decision under the auxiliary metric.
    #[inline]
    pub fn decision(&self, obs: ChannelObservation) -> usize {
        self.decisions[obs.joint(self.bins)] as usize
    }

    #[inline]
    pub fn decision_joint(&self, joint: usize) -> usize {
        self.decisions[joint] as usize
    }

    /// L-values of a symbol sequence, symbol-major.
    pub fn demap(&self, observations: &[ChannelObservation]) -> Vec<f64> {
        let mut out = Vec::with_capacity(observations.len() * self.bits_per_symbol);
        for &o in observations {
            out.extend_from_slice(self.llrs(o));
        }
        out
    }
}

/// L-value tables conditioned on known values of some bit positions, as used
/// by the second stage of multistage decoding.
#[derive(Debug, Clone)]
pub struct ConditionedLlrTable {
    known: Vec<usize>,
    tables: Vec<LlrTable>,
}

impl ConditionedLlrTable {
    pub fn build(
        spec: &ConstellationSpec,
        aux: &AuxChannel,
        mode: DemapMode,
        known: &[usize],
    ) -> Self {
        let tables = (0..1usize << known.len())
            .map(|combo| {
                let symbols: Vec<usize> = (0..spec.order())
                    .filter(|&s| {
                        known
                            .iter()
                            .enumerate()
                            .all(|(t, &k)| spec.bit(s, k) as usize == (combo >> (known.len() - 1 - t)) & 1)
                    })
                    .collect();
                LlrTable::build_restricted(spec, aux, mode, &symbols)
            })
            .collect();
        ConditionedLlrTable {
            known: known.to_vec(),
            tables,
        }
    }

    pub fn processed(&self, quantizer: &LlrQuantizer) -> Self {
        ConditionedLlrTable {
            known: self.known.clone(),
            tables: self.tables.iter().map(|t| t.processed(quantizer)).collect(),
        }
    }

    pub fn known_positions(&self) -> &[usize] {
        &self.known
    }

    /// Table for the given known bit values, listed in `known_positions` order.
    pub fn table(&self, known_bits: &[u8]) -> &LlrTable {
        let combo = known_bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        &self.tables[combo]
    }
}

/// Per-bit L-values with the transmitted bits.
#[derive(Debug, Clone, PartialEq)]
pub struct LValueFrame {
    l: Vec<f64>,
    bits: Vec<u8>,
}

const BINARY_MAGIC: &[u8; 8] = b"LVFRAME1";

/// On-disk format of an L-value capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LValueFormat {
    Csv,
    Binary,
}

impl std::str::FromStr for LValueFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(LValueFormat::Csv),
            "binary" | "bin" => Ok(LValueFormat::Binary),
            other => Err(Error::config(format!("unknown L-value format '{other}'"))),
        }
    }
}

impl LValueFrame {
    pub fn new(l: Vec<f64>, bits: Vec<u8>) -> Result<Self> {
        if l.len() != bits.len() {
            return Err(Error::Length {
                expected: l.len(),
                actual: bits.len(),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::domain("transmitted bits must be 0 or 1"));
        }
        Ok(LValueFrame { l, bits })
    }

    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    pub fn llrs(&self) -> &[f64] {
        &self.l
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// `L_a = (-1)^b L`.
    pub fn symmetrized(&self) -> impl Iterator<Item = f64> + '_ {
        self.l
            .iter()
            .zip(&self.bits)
            .map(|(&l, &b)| if b == 0 { l } else { -l })
    }

    pub fn hard_decisions(&self) -> Vec<u8> {
        hard_decide(&self.l)
    }

    pub fn write<W: Write>(&self, out: W, format: LValueFormat) -> Result<()> {
        match format {
            LValueFormat::Csv => self.write_csv(out),
            LValueFormat::Binary => self.write_binary(out),
        }
    }

    pub fn read<R: Read>(input: R, format: LValueFormat) -> Result<Self> {
        match format {
            LValueFormat::Csv => Self::read_csv(input),
            LValueFormat::Binary => Self::read_binary(input),
        }
    }

    /// Rows `bit_position,transmitted_bit,L` under a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bit_position", "transmitted_bit", "L"])?;
        for (i, (&l, &b)) in self.l.iter().zip(&self.bits).enumerate() {
            w.write_record([i.to_string(), b.to_string(), format!("{l:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rows may come in any order; the bit positions must cover `0..n` once.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let bad = |message: String| Error::Parse { line, message };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let pos: usize = rec[0].parse().map_err(|e| bad(format!("bit_position: {e}")))?;
            let bit: u8 = match &rec[1] {
                "0" => 0,
                "1" => 1,
                other => return Err(bad(format!("transmitted_bit must be 0 or 1, got '{other}'"))),
            };
            let l: f64 = rec[2].parse().map_err(|e| bad(format!("L: {e}")))?;
            if l.is_nan() {
                return Err(bad("L is NaN".into()));
            }
            rows.push((line, pos, bit, l));
        }
        Self::from_rows(rows)
    }

    /// `LVFRAME1` followed by records of (u32 LE position, u8 bit, f64 LE L).
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(BINARY_MAGIC)?;
        for (i, (&l, &b)) in self.l.iter().zip(&self.bits).enumerate() {
            out.write_all(&(i as u32).to_le_bytes())?;
            out.write_all(&[b])?;
            out.write_all(&l.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Parse errors report the 1-based record number as the line.
    pub fn read_binary<R: Read>(input: R) -> Result<Self> {
        let mut r = BufReader::new(input);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| Error::Parse {
            line: 0,
            message: "missing LVFRAME1 header".into(),
        })?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse {
                line: 0,
                message: "bad magic, expected LVFRAME1".into(),
            });
        }
        let mut rows = Vec::new();
        let mut rec = [0u8; 13];
        let mut index = 0u64;
        loop {
            if r.fill_buf()?.is_empty() {
                break;
            }
            index += 1;
            r.read_exact(&mut rec).map_err(|_| Error::Parse {
                line: index,
                message: "truncated record".into(),
            })?;
            let pos = u32::from_le_bytes(rec[0..4].try_into().unwrap()) as usize;
            let bit = rec[4];
            let l = f64::from_le_bytes(rec[5..13].try_into().unwrap());
            if bit > 1 {
                return Err(Error::Parse {
                    line: index,
                    message: format!("transmitted bit must be 0 or 1, got {bit}"),
                });
            }
            if l.is_nan() {
                return Err(Error::Parse {
                    line: index,
                    message: "L is NaN".into(),
                });
            }
            rows.push((index, pos, bit, l));
        }
        Self::from_rows(rows)
    }

    fn from_rows(rows: Vec<(u64, usize, u8, f64)>) -> Result<Self> {
        let n = rows.len();
        let mut l = vec![0.0; n];
        let mut bits = vec![0u8; n];
        let mut seen = vec![false; n];
        for (line, pos, bit, value) in rows {
            if pos >= n || seen[pos] {
                return Err(Error::Parse {
                    line,
                    message: format!("bit_position {pos} is duplicated or out of range 0..{n}"),
                });
            }
            seen[pos] = true;
            l[pos] = value;
            bits[pos] = bit;
        }
        Ok(LValueFrame { l, bits })
    }
}
