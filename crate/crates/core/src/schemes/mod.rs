//! End-to-end transceivers: BICM with uniform or shaped signalling, and
//! shaped multilevel coding with two-stage decoding.
//!
//! Every scheme is described by a slot map that says, for each label bit of
//! each transmitted symbol, whether it carries a code bit, an uncoded
//! amplitude bit or filler. Mapping, demapping and the structural checks all
//! go through this map.

mod interleaver;

pub use interleaver::{invert, is_permutation, random_permutation};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelObservation, DmcModel, DEFAULT_QUANTIZER_BITS, DEFAULT_RANGE_SIGMAS};
use crate::constellation::{BitRole, ConstellationSpec, Labeling};
use crate::demapper::{
    AuxChannel, ConditionedLlrTable, DemapMode, LValueFrame, LlrQuantizer, LlrTable,
};
use crate::error::{Error, Result};
use crate::fec::{CodeDefinition, CodeId, DecodeOutcome, Decoder, DecoderMode};
use crate::metrics::AsiAccumulator;
use crate::shaping::{find_nu_for_entropy, pas_rate_check, Ccdm, CcdmConfig, PasScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    BicmUniform,
    BicmPs,
    MlcPs,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::BicmUniform => "bicm_uniform",
            SchemeKind::BicmPs => "bicm_ps",
            SchemeKind::MlcPs => "mlc_ps",
        }
    }
}

/// Source of the bits the second decoding stage conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageTwoConditioning {
    /// Sign-level bits as decoded by the LDPC stage.
    #[default]
    Decoded,
    /// Transmitted sign-level bits (diagnostic upper bound).
    Genie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub order: usize,
    /// Target symbol entropy of the shaped schemes, bits per symbol.
    pub entropy: Option<f64>,
    pub ccdm_block_length: usize,
    pub code: CodeId,
    pub decoder: DecoderMode,
    pub max_iterations: usize,
    pub interleaver_seed: u64,
    pub demap_mode: DemapMode,
    pub llr: LlrQuantizer,
    pub quantizer_bits: u32,
    pub quantizer_range_sigmas: f64,
    pub stage_two: StageTwoConditioning,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            kind: SchemeKind::BicmUniform,
            order: 16,
            entropy: None,
            ccdm_block_length: crate::shaping::DEFAULT_BLOCK_LENGTH,
            code: CodeId::Dvbs2R45,
            decoder: DecoderMode::SumProduct,
            max_iterations: 20,
            interleaver_seed: 1,
            demap_mode: DemapMode::ExactMap,
            llr: LlrQuantizer::default(),
            quantizer_bits: DEFAULT_QUANTIZER_BITS,
            quantizer_range_sigmas: DEFAULT_RANGE_SIGMAS,
            stage_two: StageTwoConditioning::Decoded,
        }
    }
}

impl SchemeConfig {
    pub fn bicm_uniform(order: usize) -> Self {
        SchemeConfig {
            order,
            ..Default::default()
        }
    }

    pub fn bicm_ps(entropy: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::BicmPs,
            order: 64,
            entropy: Some(entropy),
            ..Default::default()
        }
    }

    pub fn mlc_ps(entropy: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::MlcPs,
            order: 64,
            entropy: Some(entropy),
            ..Default::default()
        }
    }

    /// Short label such as `bicm_ps_64qam`.
    pub fn label(&self) -> String {
        format!("{}_{}qam", self.kind.name(), self.order)
    }
}

/// What a label bit of a transmitted symbol carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Code(u32),
    /// Uncoded amplitude bit, indexed into the frame's amplitude-bit stream.
    Uncoded(u32),
    Filler,
}

/// A scheme with its constellation, code, matcher and slot map; immutable.
#[derive(Debug, Clone)]
pub struct Scheme {
    config: SchemeConfig,
    spec: ConstellationSpec,
    code: CodeDefinition,
    ccdm: Option<Ccdm>,
    symbols: usize,
    slots: Vec<Slot>,
    amplitude_bits: usize,
    /// Coded sign-level data bits placed after the amplitude bits (PAS).
    sign_data_bits: usize,
}

/// Demapper state for one `(SNR_tr, SNR_aux)` pair.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub snr_tr_db: f64,
    pub snr_aux_db: f64,
    pub channel: DmcModel,
    pub aux: AuxChannel,
    /// Clipped and quantized L-values fed to the decoder.
    pub table: LlrTable,
    pub conditioned: Option<ConditionedLlrTable>,
}

/// Per-frame counters; merging is exact.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameCounts {
    pub frames: u64,
    /// Channel bits compared against hard decisions (filler excluded).
    pub bits_pre: u64,
    pub errors_pre: u64,
    pub lvalues: AsiAccumulator,
    pub symbols: u64,
    pub symbol_errors: u64,
    pub bits_post: u64,
    pub errors_post: u64,
    pub bits_e2e: u64,
    pub errors_e2e: u64,
    pub frame_errors: u64,
    pub flips: u64,
    pub code_bits: u64,
    pub unconverged: u64,
    pub flagged_blocks: u64,
}

impl FrameCounts {
    pub fn merge(&mut self, o: &FrameCounts) {
        self.frames += o.frames;
        self.bits_pre += o.bits_pre;
        self.errors_pre += o.errors_pre;
        self.lvalues.merge(&o.lvalues);
        self.symbols += o.symbols;
        self.symbol_errors += o.symbol_errors;
        self.bits_post += o.bits_post;
        self.errors_post += o.errors_post;
        self.bits_e2e += o.bits_e2e;
        self.errors_e2e += o.errors_e2e;
        self.frame_errors += o.frame_errors;
        self.flips += o.flips;
        self.code_bits += o.code_bits;
        self.unconverged += o.unconverged;
        self.flagged_blocks += o.flagged_blocks;
    }

    fn rate(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn ber_pre(&self) -> f64 {
        Self::rate(self.errors_pre, self.bits_pre)
    }

    pub fn ser(&self) -> f64 {
        Self::rate(self.symbol_errors, self.symbols)
    }

    pub fn ber_post(&self) -> f64 {
        Self::rate(self.errors_post, self.bits_post)
    }

    pub fn ber_e2e(&self) -> f64 {
        Self::rate(self.errors_e2e, self.bits_e2e)
    }

    /// Flip-count estimate of the pre-FEC BER on the coded bits.
    pub fn ber_flips(&self) -> f64 {
        Self::rate(self.flips, self.code_bits)
    }
}

/// Everything observed while transmitting one frame.
#[derive(Debug, Clone)]
pub struct FrameResult {
    pub codeword: Vec<u8>,
    pub symbols: Vec<usize>,
    pub observations: Vec<ChannelObservation>,
    /// Demapper output and transmitted bits in slot order, filler excluded.
    pub lvalues: LValueFrame,
    pub decode: DecodeOutcome,
    /// Second-stage amplitude decisions of multilevel schemes.
    pub stage_two_bits: Option<Vec<u8>>,
    pub counts: FrameCounts,
}

/// Counters of a completed frame.
pub fn measure_frame(result: &FrameResult) -> FrameCounts {
    result.counts
}

/// Deterministic per-frame random stream.
pub fn frame_rng(base_seed: u64, point: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(base_seed ^ splitmix(point.wrapping_add(0x5851_f42d))));
    rng.set_stream(frame);
    rng
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let word: u64 = rng.random();
        for b in 0..64.min(n - out.len()) {
            out.push(((word >> b) & 1) as u8);
        }
    }
    out
}

impl Scheme {
    pub fn new(config: SchemeConfig) -> Result<Self> {
        config.llr.validate()?;
        if config.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        let code = config.code.build().with_max_iterations(config.max_iterations);
        let n = code.n();
        match config.kind {
            SchemeKind::BicmUniform => {
                if config.entropy.is_some() {
                    return Err(Error::config("uniform BICM takes no entropy target"));
                }
                let spec = ConstellationSpec::uniform_qam(config.order, Labeling::Gray)?;
                let m = spec.bits_per_symbol();
                let symbols = n.div_ceil(m);
                let perm = random_permutation(n, config.interleaver_seed);
                let mut slots: Vec<Slot> = perm.iter().map(|&c| Slot::Code(c)).collect();
                slots.resize(symbols * m, Slot::Filler);
                Ok(Scheme {
                    config,
                    spec,
                    code,
                    ccdm: None,
                    symbols,
                    slots,
                    amplitude_bits: 0,
                    sign_data_bits: 0,
                })
            }
            SchemeKind::BicmPs | SchemeKind::MlcPs => Self::shaped(config, code),
        }
    }

    fn shaped(config: SchemeConfig, code: CodeDefinition) -> Result<Self> {
        let (n, k) = (code.n(), code.k());
        let entropy = config
            .entropy
            .ok_or_else(|| Error::config("shaped schemes need an entropy target"))?;
        let labeling = match config.kind {
            SchemeKind::BicmPs => Labeling::Gray,
            _ => Labeling::SetPartition,
        };
        let mb = find_nu_for_entropy(entropy, config.order)?;
        let ccdm_cfg = CcdmConfig::from_distribution(mb.probs(), config.ccdm_block_length)?;
        // The demapper prior is the frequency the matcher actually emits.
        let spec = ConstellationSpec::shaped_square(config.order, &ccdm_cfg.distribution(), labeling)?;
        let m = spec.bits_per_symbol();
        let bpa = m / 2;
        let amp_bits_per_axis = bpa - 1;
        let signs = spec.bit_levels().positions(BitRole::Sign);
        debug_assert_eq!(signs, vec![0, bpa]);

        let (symbols, sign_data_bits) = match config.kind {
            SchemeKind::BicmPs => {
                if n % m != 0 {
                    return Err(Error::config(format!("codeword length {n} is not a multiple of {m}")));
                }
                let symbols = n / m;
                let amp = 2 * symbols * amp_bits_per_axis;
                if amp > k || 2 * symbols < n - k {
                    return Err(Error::config("code rate too low for PAS sign-bit parity placement"));
                }
                (symbols, k - amp)
            }
            _ => {
                if n % 2 != 0 {
                    return Err(Error::config("codeword length must be even for two sign levels"));
                }
                (n / 2, 0)
            }
        };
        let amplitudes = 2 * symbols;
        if amplitudes % config.ccdm_block_length != 0 {
            return Err(Error::config(format!(
                "{amplitudes} amplitudes per frame are not a whole number of {}-amplitude blocks",
                config.ccdm_block_length
            )));
        }
        let amplitude_bits = amplitudes * amp_bits_per_axis;

        let mut slots = vec![Slot::Filler; symbols * m];
        match config.kind {
            SchemeKind::BicmPs => {
                // Amplitudes move as units so each keeps its own axis; sign
                // slots get the sign data and the parity.
                let amp_perm = random_permutation(amplitudes, config.interleaver_seed);
                let sign_perm = random_permutation(amplitudes, splitmix(config.interleaver_seed));
                let sign_base = amplitude_bits as u32;
                for unit in 0..amplitudes {
                    let (s, axis) = (unit / 2, unit % 2);
                    let base = s * m + axis * bpa;
                    slots[base] = Slot::Code(sign_base + sign_perm[unit]);
                    let a = amp_perm[unit] as usize;
                    for r in 0..amp_bits_per_axis {
                        slots[base + 1 + r] = Slot::Code((a * amp_bits_per_axis + r) as u32);
                    }
                }
            }
            _ => {
                let perm = random_permutation(n, config.interleaver_seed);
                for unit in 0..amplitudes {
                    let (s, axis) = (unit / 2, unit % 2);
                    let base = s * m + axis * bpa;
                    slots[base] = Slot::Code(perm[unit]);
                    for r in 0..amp_bits_per_axis {
                        slots[base + 1 + r] = Slot::Uncoded((unit * amp_bits_per_axis + r) as u32);
                    }
                }
            }
        }
        Ok(Scheme {
            config,
            spec,
            code,
            ccdm: Some(Ccdm::new(ccdm_cfg)),
            symbols,
            slots,
            amplitude_bits,
            sign_data_bits,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn spec(&self) -> &ConstellationSpec {
        &self.spec
    }

    pub fn code(&self) -> &CodeDefinition {
        &self.code
    }

    pub fn ccdm(&self) -> Option<&Ccdm> {
        self.ccdm.as_ref()
    }

    pub fn symbols_per_frame(&self) -> usize {
        self.symbols
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    fn blocks(&self) -> usize {
        self.ccdm
            .as_ref()
            .map(|c| 2 * self.symbols / c.config().block_length())
            .unwrap_or(0)
    }

    /// Source bits per frame: matcher input plus uniform payload bits.
    pub fn source_bits_per_frame(&self) -> usize {
        match self.config.kind {
            SchemeKind::BicmUniform => self.code.k(),
            SchemeKind::BicmPs => self.matcher_bits() + self.sign_data_bits,
            SchemeKind::MlcPs => self.matcher_bits() + self.code.k(),
        }
    }

    fn matcher_bits(&self) -> usize {
        self.ccdm
            .as_ref()
            .map(|c| c.config().input_bits() * self.blocks())
            .unwrap_or(0)
    }

    /// Realized information rate in bits per symbol.
    pub fn information_rate(&self) -> f64 {
        self.source_bits_per_frame() as f64 / self.symbols as f64
    }

    /// Information rate from the entropy bookkeeping; equals
    /// [`Scheme::information_rate`] when every frame is fully used.
    pub fn nominal_information_rate(&self) -> f64 {
        let h = self.spec.symbol_entropy();
        let rate_loss = self.ccdm.as_ref().map(|c| c.config().rate_loss()).unwrap_or(0.0);
        let m = self.spec.bits_per_symbol();
        match self.config.kind {
            SchemeKind::BicmUniform => m as f64 * self.code.rate(),
            SchemeKind::BicmPs => pas_rate_check(PasScheme::BicmPs, h, self.code.rate(), rate_loss, m),
            SchemeKind::MlcPs => pas_rate_check(PasScheme::MlcPs, h, self.code.rate(), rate_loss, m),
        }
    }

    pub fn operating_point(&self, snr_tr_db: f64, snr_aux_db: f64) -> Result<OperatingPoint> {
        let channel = DmcModel::build_with_range(
            &self.spec,
            snr_tr_db,
            self.config.quantizer_bits,
            self.config.quantizer_range_sigmas,
        )?;
        let aux = AuxChannel::new(&self.spec, snr_aux_db, channel.quantizer())?;
        let table = LlrTable::build(&self.spec, &aux, self.config.demap_mode).processed(&self.config.llr);
        let conditioned = (self.config.kind == SchemeKind::MlcPs).then(|| {
            let known = self.spec.bit_levels().positions(BitRole::Sign);
            ConditionedLlrTable::build(&self.spec, &aux, self.config.demap_mode, &known)
                .processed(&self.config.llr)
        });
        Ok(OperatingPoint {
            snr_tr_db,
            snr_aux_db,
            channel,
            aux,
            table,
            conditioned,
        })
    }

    /// Transmits and receives one frame.
    pub fn run_frame<R: Rng>(&self, point: &OperatingPoint, rng: &mut R) -> Result<FrameResult> {
        let m = self.spec.bits_per_symbol();
        let n = self.code.n();
        let k = self.code.k();
        let blocks = self.blocks();

        // Source and payload.
        let (matcher_source, amplitudes) = match &self.ccdm {
            Some(ccdm) => {
                let src = random_bits(rng, ccdm.config().input_bits() * blocks);
                let shaped = ccdm.encode_frame(&src, blocks)?;
                (src, shaped.amplitudes)
            }
            None => (Vec::new(), Vec::new()),
        };
        let axis = self.spec.axis();
        let amp_bits_per_axis = axis.map(|a| a.bits() - 1).unwrap_or(0);
        let mut amp_bits = Vec::with_capacity(self.amplitude_bits);
        if let Some(axis) = axis {
            for &a in &amplitudes {
                let label = axis.amplitude_label(a);
                for r in (0..amp_bits_per_axis).rev() {
                    amp_bits.push(((label >> r) & 1) as u8);
                }
            }
        }
        let payload = match self.config.kind {
            SchemeKind::BicmUniform | SchemeKind::MlcPs => random_bits(rng, k),
            SchemeKind::BicmPs => {
                let mut p = amp_bits.clone();
                p.extend(random_bits(rng, self.sign_data_bits));
                p
            }
        };
        let codeword = self.code.encode(&payload)?;
        let filler = random_bits(rng, self.slots.iter().filter(|s| **s == Slot::Filler).count());

        // Mapping.
        let mut slot_bits = Vec::with_capacity(self.slots.len());
        let mut filler_iter = filler.iter();
        for slot in &self.slots {
            slot_bits.push(match *slot {
                Slot::Code(c) => codeword[c as usize],
                Slot::Uncoded(u) => amp_bits[u as usize],
                Slot::Filler => *filler_iter.next().expect("filler count"),
            });
        }
        let symbols: Vec<usize> = slot_bits
            .chunks(m)
            .map(|bits| {
                let label = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                self.spec.symbol_of_label(label)
            })
            .collect();

        // Channel and demapper.
        let observations: Vec<ChannelObservation> =
            symbols.iter().map(|&s| point.channel.sample(s, rng)).collect();
        let mut counts = FrameCounts {
            frames: 1,
            symbols: symbols.len() as u64,
            ..Default::default()
        };
        let mut llr_code = vec![0.0; n];
        let mut slot_l = Vec::with_capacity(self.slots.len());
        let mut slot_b = Vec::with_capacity(self.slots.len());
        for (t, (&s, &obs)) in symbols.iter().zip(&observations).enumerate() {
            counts.symbol_errors += (point.table.decision(obs) != s) as u64;
            let l = point.table.llrs(obs);
            for j in 0..m {
                let slot = self.slots[t * m + j];
                if slot == Slot::Filler {
                    continue;
                }
                let bit = slot_bits[t * m + j];
                counts.lvalues.add_bit(l[j], bit);
                slot_l.push(l[j]);
                slot_b.push(bit);
                if let Slot::Code(c) = slot {
                    llr_code[c as usize] = l[j];
                }
            }
        }
        counts.bits_pre = counts.lvalues.samples();
        counts.errors_pre = counts.lvalues.errors();

        // Soft decoding.
        let decode = Decoder::new(&self.code, self.config.decoder).decode(&llr_code);
        counts.flips = decode.flip_count as u64;
        counts.code_bits = n as u64;
        counts.unconverged = (!decode.parity_satisfied) as u64;
        let info_errors = decode.bits[..k]
            .iter()
            .zip(&payload)
            .filter(|(a, b)| a != b)
            .count() as u64;

        let mut stage_two_bits = None;
        match self.config.kind {
            SchemeKind::BicmUniform => {
                counts.bits_post = k as u64;
                counts.errors_post = info_errors;
                counts.bits_e2e = k as u64;
                counts.errors_e2e = info_errors;
            }
            SchemeKind::BicmPs => {
                counts.bits_post = k as u64;
                counts.errors_post = info_errors;
                let decoded_amps = self.amplitudes_from_bits(&decode.bits[..self.amplitude_bits]);
                let (bits, flagged) = self.ccdm.as_ref().unwrap().decode_frame(&decoded_amps);
                counts.flagged_blocks = flagged as u64;
                let sign_data = &decode.bits[self.amplitude_bits..k];
                counts.bits_e2e = (matcher_source.len() + sign_data.len()) as u64;
                counts.errors_e2e = count_diff(&bits, &matcher_source)
                    + count_diff(sign_data, &payload[self.amplitude_bits..k]);
            }
            SchemeKind::MlcPs => {
                let cond = point.conditioned.as_ref().expect("multilevel tables");
                let known = cond.known_positions().to_vec();
                let mut decided = vec![0u8; self.amplitude_bits];
                for (t, &obs) in observations.iter().enumerate() {
                    let known_bits: Vec<u8> = known
                        .iter()
                        .map(|&j| match (self.slots[t * m + j], self.config.stage_two) {
                            (Slot::Code(c), StageTwoConditioning::Decoded) => decode.bits[c as usize],
                            _ => slot_bits[t * m + j],
                        })
                        .collect();
                    let l = cond.table(&known_bits).llrs(obs);
                    for j in 0..m {
                        if let Slot::Uncoded(u) = self.slots[t * m + j] {
                            decided[u as usize] = (l[j] < 0.0) as u8;
                        }
                    }
                }
                let amp_errors = count_diff(&decided, &amp_bits);
                counts.bits_post = (k + self.amplitude_bits) as u64;
                counts.errors_post = info_errors + amp_errors;
                let decoded_amps = self.amplitudes_from_bits(&decided);
                let (bits, flagged) = self.ccdm.as_ref().unwrap().decode_frame(&decoded_amps);
                counts.flagged_blocks = flagged as u64;
                counts.bits_e2e = (matcher_source.len() + k) as u64;
                counts.errors_e2e = count_diff(&bits, &matcher_source) + info_errors;
                stage_two_bits = Some(decided);
            }
        }
        counts.frame_errors = (counts.errors_post > 0) as u64;

        Ok(FrameResult {
            codeword,
            symbols,
            observations,
            lvalues: LValueFrame::new(slot_l, slot_b)?,
            decode,
            stage_two_bits,
            counts,
        })
    }

    fn amplitudes_from_bits(&self, bits: &[u8]) -> Vec<usize> {
        let axis = self.spec.axis().expect("shaped schemes are square");
        let per = axis.bits() - 1;
        bits.chunks(per)
            .map(|c| axis.amplitude_from_label(c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32)))
            .collect()
    }
}

fn count_diff(a: &[u8], b: &[u8]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}
