//! Experiment harness: scenario sweeps, threshold search and offline
//! L-value analysis. This is the only module that owns threads.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{asi_from_lvalues, gmi_from_ngmi, mi_symbolwise, MetricsReport};
use crate::schemes::{frame_rng, FrameCounts, OperatingPoint, Scheme, SchemeConfig};
use crate::demapper::LValueFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// `SNR_aux = SNR_tr`.
    #[default]
    Matched,
    /// `SNR_aux = SNR_lim`, sweeping `SNR_tr`.
    FixedAux,
    /// `SNR_tr = SNR_lim`, sweeping `SNR_aux`.
    FixedTr,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Matched => "matched",
            Scenario::FixedAux => "fixed_aux",
            Scenario::FixedTr => "fixed_tr",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matched" => Ok(Scenario::Matched),
            "fixed_aux" | "fixed-aux" => Ok(Scenario::FixedAux),
            "fixed_tr" | "fixed-tr" => Ok(Scenario::FixedTr),
            other => Err(Error::config(format!("unknown scenario '{other}'"))),
        }
    }
}

/// SNR grid in dB, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Self {
        SnrGrid {
            start_db,
            stop_db,
            step_db,
        }
    }

    pub fn single(snr_db: f64) -> Self {
        SnrGrid::new(snr_db, snr_db, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_db.is_finite() && self.stop_db.is_finite()) {
            return Err(Error::config("grid bounds must be finite"));
        }
        if !(self.step_db > 0.0) {
            return Err(Error::config(format!("grid step must be positive, got {}", self.step_db)));
        }
        if self.stop_db < self.start_db {
            return Err(Error::config("grid stop lies below start"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| round_db(self.start_db + i as f64 * self.step_db))
            .collect()
    }
}

fn round_db(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub target_ber: f64,
    pub tolerance_db: f64,
    /// Search bracket; the post-FEC BER must straddle the target inside it.
    pub low_db: f64,
    pub high_db: f64,
    pub min_frames: u64,
    pub max_frames: u64,
    /// Frames simulated between stopping checks.
    pub batch_frames: u64,
    /// Normal quantile of the Wilson interval.
    pub z: f64,
    /// Demap every probe at this SNR instead of the probe's own.
    pub fixed_aux_db: Option<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            target_ber: 1e-4,
            tolerance_db: 0.05,
            low_db: 8.0,
            high_db: 22.0,
            min_frames: 10,
            max_frames: 300,
            batch_frames: 10,
            z: 1.96,
            fixed_aux_db: None,
        }
    }
}

/// Contents of an experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: SchemeConfig,
    pub scenario: Scenario,
    pub grid: SnrGrid,
    pub snr_lim_db: Option<f64>,
    pub frames: u64,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub threshold: ThresholdConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scheme: SchemeConfig::default(),
            scenario: Scenario::Matched,
            grid: SnrGrid::new(9.9, 11.9, 0.5),
            snr_lim_db: None,
            frames: 100,
            seed: 1,
            workers: 1,
            output: None,
            threshold: ThresholdConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.message()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.frames == 0 {
            return Err(Error::config("frames must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers must be at least 1"));
        }
        if self.scenario != Scenario::Matched && self.snr_lim_db.is_none() {
            return Err(Error::config(format!(
                "scenario {} needs snr_lim_db",
                self.scenario.name()
            )));
        }
        Ok(())
    }

    /// `(SNR_tr, SNR_aux)` of every grid point.
    pub fn operating_snrs(&self) -> Vec<(f64, f64)> {
        let lim = self.snr_lim_db.unwrap_or(f64::NAN);
        self.grid
            .points()
            .into_iter()
            .map(|g| match self.scenario {
                Scenario::Matched => (g, g),
                Scenario::FixedAux => (g, lim),
                Scenario::FixedTr => (lim, g),
            })
            .collect()
    }
}

/// Noise streams are keyed by `SNR_tr`, so scenarios that share a transmit
/// SNR see the same channel realizations.
fn point_key(snr_tr_db: f64) -> u64 {
    (snr_tr_db * 1e4).round() as i64 as u64
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))
}

/// Runs frames `first..first + count` at one operating point and merges
/// their counters in frame order.
fn run_frames(
    scheme: &Scheme,
    point: &OperatingPoint,
    seed: u64,
    first: u64,
    count: u64,
) -> Result<FrameCounts> {
    let key = point_key(point.snr_tr_db);
    let per_frame: Vec<Result<FrameCounts>> = (first..first + count)
        .into_par_iter()
        .map(|f| {
            let mut rng = frame_rng(seed, key, f);
            scheme.run_frame(point, &mut rng).map(|r| r.counts)
        })
        .collect();
    let mut total = FrameCounts::default();
    for c in per_frame {
        total.merge(&c?);
    }
    Ok(total)
}

/// Scalar metrics of an operating point from merged frame counters.
pub fn report_from_counts(
    scheme: &Scheme,
    point: &OperatingPoint,
    counts: &FrameCounts,
    snr_lim_db: Option<f64>,
    scenario: Scenario,
) -> MetricsReport {
    let spec = scheme.spec();
    let lim = snr_lim_db.unwrap_or(f64::NAN);
    let relative = match scenario {
        Scenario::FixedTr => point.snr_aux_db - lim,
        _ => point.snr_tr_db - lim,
    };
    let ngmi = counts.lvalues.asi().unwrap_or(f64::NAN);
    MetricsReport {
        snr_tr_db: point.snr_tr_db,
        snr_aux_db: point.snr_aux_db,
        relative_snr_db: round_db(relative),
        frames: counts.frames,
        total_bits: counts.bits_pre,
        ber_pre: counts.ber_pre(),
        ser: counts.ser(),
        asi: ngmi,
        ngmi,
        gmi: gmi_from_ngmi(ngmi, spec.symbol_entropy(), spec.bits_per_symbol()),
        mi_bits: mi_symbolwise(&point.channel, spec.prior()),
        q_ber_db: f64::NAN,
        q_asi_db: f64::NAN,
        ber_post: counts.ber_post(),
        ber_e2e: counts.ber_e2e(),
    }
    .with_q_factors()
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub report: MetricsReport,
    pub counts: FrameCounts,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub scheme: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
}

/// Runs every grid point of `config`; output is identical for any worker
/// count.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let scheme = Scheme::new(config.scheme.clone())?;
    let pool = pool(config.workers)?;
    let snrs = config.operating_snrs();
    let mut points = Vec::with_capacity(snrs.len());
    for (i, &(tr, aux)) in snrs.iter().enumerate() {
        let point = scheme.operating_point(tr, aux)?;
        let counts = pool.install(|| run_frames(&scheme, &point, config.seed, 0, config.frames))?;
        let report = report_from_counts(&scheme, &point, &counts, config.snr_lim_db, config.scenario);
        log::info!(
            "[{}/{}] {} {} tr {:.2} aux {:.2}: ber_pre {:.3e} ber_post {:.3e} q_ber {:.3} q_asi {:.3}",
            i + 1,
            snrs.len(),
            config.scheme.label(),
            config.scenario.name(),
            tr,
            aux,
            report.ber_pre,
            report.ber_post,
            report.q_ber_db,
            report.q_asi_db
        );
        points.push(SweepPoint { report, counts });
    }
    Ok(SweepResult {
        scheme: config.scheme.label(),
        scenario: config.scenario,
        seed: config.seed,
        points,
    })
}

pub const SWEEP_HEADER: [&str; 16] = [
    "scheme",
    "scenario",
    "snr_tr_db",
    "snr_aux_db",
    "relative_snr_db",
    "frames",
    "ber_pre",
    "ser",
    "asi",
    "ngmi",
    "mi_bits",
    "q_ber_db",
    "q_asi_db",
    "ber_post",
    "ber_e2e",
    "seed",
];

#[derive(Debug, Serialize)]
struct SweepRow<'a> {
    scheme: &'a str,
    scenario: &'a str,
    snr_tr_db: f64,
    snr_aux_db: f64,
    relative_snr_db: f64,
    frames: u64,
    ber_pre: f64,
    ser: f64,
    asi: f64,
    ngmi: f64,
    mi_bits: f64,
    q_ber_db: f64,
    q_asi_db: f64,
    ber_post: f64,
    ber_e2e: f64,
    seed: u64,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            let r = &p.report;
            w.serialize(SweepRow {
                scheme: &self.scheme,
                scenario: self.scenario.name(),
                snr_tr_db: r.snr_tr_db,
                snr_aux_db: r.snr_aux_db,
                relative_snr_db: r.relative_snr_db,
                frames: r.frames,
                ber_pre: r.ber_pre,
                ser: r.ser,
                asi: r.asi,
                ngmi: r.ngmi,
                mi_bits: r.mi_bits,
                q_ber_db: r.q_ber_db,
                q_asi_db: r.q_asi_db,
                ber_post: r.ber_post,
                ber_e2e: r.ber_e2e,
                seed: self.seed,
            })?;
        }
        if self.points.is_empty() {
            w.write_record(SWEEP_HEADER)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Two-sided Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Above,
    Below,
    /// Frame budget exhausted; classified by the point estimate.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub verdict: Verdict,
    pub above: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub scheme: String,
    pub snr_lim_db: f64,
    /// Final bisection bracket.
    pub ci_low_db: f64,
    pub ci_high_db: f64,
    pub probes: Vec<Probe>,
}

/// Bit errors of a failed frame cluster, so the stopping rule counts frames:
/// a Wilson interval on the frame error rate, scaled to a BER interval by the
/// mean number of bit errors per failed frame.
fn ber_interval(counts: &FrameCounts, errors_per_failure: f64, z: f64) -> (f64, f64) {
    let bits_per_frame = counts.bits_post as f64 / counts.frames.max(1) as f64;
    let (lo, hi) = wilson_interval(counts.frame_errors, counts.frames, z);
    let scale = errors_per_failure / bits_per_frame.max(1.0);
    (lo * scale, (hi * scale).min(1.0))
}

fn probe(
    scheme: &Scheme,
    snr_db: f64,
    cfg: &ThresholdConfig,
    seed: u64,
    pool: &rayon::ThreadPool,
    errors_per_failure: &mut Option<f64>,
) -> Result<Probe> {
    let point = scheme.operating_point(snr_db, cfg.fixed_aux_db.unwrap_or(snr_db))?;
    let mut counts = FrameCounts::default();
    let batch = cfg.batch_frames.max(1);
    let spread = |counts: &FrameCounts, prior: Option<f64>| {
        if counts.frame_errors > 0 {
            counts.errors_post as f64 / counts.frame_errors as f64
        } else {
            prior.unwrap_or(counts.bits_post as f64 / counts.frames.max(1) as f64)
        }
    };
    let verdict = loop {
        let next = batch.min(cfg.max_frames - counts.frames);
        let more = pool.install(|| run_frames(scheme, &point, seed, counts.frames, next))?;
        counts.merge(&more);
        let (lo, hi) = ber_interval(&counts, spread(&counts, *errors_per_failure), cfg.z);
        if counts.frames >= cfg.min_frames {
            if lo > cfg.target_ber {
                break Verdict::Above;
            }
            if hi < cfg.target_ber {
                break Verdict::Below;
            }
        }
        if counts.frames >= cfg.max_frames {
            break Verdict::Unresolved;
        }
    };
    let ber = counts.ber_post();
    let (ci_low, ci_high) = ber_interval(&counts, spread(&counts, *errors_per_failure), cfg.z);
    if counts.frame_errors > 0 {
        *errors_per_failure = Some(spread(&counts, None));
    }
    let p = Probe {
        snr_db,
        frames: counts.frames,
        bits: counts.bits_post,
        errors: counts.errors_post,
        frame_errors: counts.frame_errors,
        ber,
        ci_low,
        ci_high,
        verdict,
        above: match verdict {
            Verdict::Above => true,
            Verdict::Below => false,
            Verdict::Unresolved => ber > cfg.target_ber,
        },
    };
    log::info!(
        "probe {:.3} dB: {} frames, ber_post {:.3e} [{:.2e}, {:.2e}] {:?}",
        snr_db,
        p.frames,
        ber,
        ci_low,
        ci_high,
        verdict
    );
    Ok(p)
}

/// Bisection on `SNR_tr` for the SNR at which the post-FEC BER crosses the
/// target, under matched demapping unless `fixed_aux_db` is set.
pub fn find_threshold(
    scheme_config: &SchemeConfig,
    cfg: &ThresholdConfig,
    seed: u64,
    workers: usize,
) -> Result<ThresholdResult> {
    if !(cfg.target_ber > 0.0 && cfg.target_ber < 0.5) {
        return Err(Error::config("target BER must lie in (0, 0.5)"));
    }
    if !(cfg.tolerance_db > 0.0) || !(cfg.low_db < cfg.high_db) {
        return Err(Error::config("threshold search needs tolerance > 0 and low < high"));
    }
    if cfg.min_frames == 0 || cfg.max_frames < cfg.min_frames {
        return Err(Error::config("threshold search needs 1 <= min_frames <= max_frames"));
    }
    let scheme = Scheme::new(scheme_config.clone())?;
    let pool = pool(workers)?;
    let mut probes = Vec::new();
    let mut spread = None;
    let mut lo = probe(&scheme, cfg.low_db, cfg, seed, &pool, &mut spread)?;
    probes.push(lo.clone());
    if !lo.above {
        return Err(Error::Bracket(format!(
            "post-FEC BER {:.3e} at {} dB is already below {:.1e}",
            lo.ber, cfg.low_db, cfg.target_ber
        )));
    }
    let mut hi = probe(&scheme, cfg.high_db, cfg, seed, &pool, &mut spread)?;
    probes.push(hi.clone());
    if hi.above {
        return Err(Error::Bracket(format!(
            "post-FEC BER {:.3e} at {} dB is still above {:.1e}",
            hi.ber, cfg.high_db, cfg.target_ber
        )));
    }
    while hi.snr_db - lo.snr_db > cfg.tolerance_db {
        let mid = round_db(0.5 * (lo.snr_db + hi.snr_db));
        let p = probe(&scheme, mid, cfg, seed, &pool, &mut spread)?;
        probes.push(p.clone());
        if p.above {
            lo = p;
        } else {
            hi = p;
        }
    }
    // Log-linear interpolation when both ends saw errors, else the midpoint.
    let snr_lim_db = if lo.ber > 0.0 && hi.ber > 0.0 && lo.ber > hi.ber {
        let t = (lo.ber.log10() - cfg.target_ber.log10()) / (lo.ber.log10() - hi.ber.log10());
        lo.snr_db + t.clamp(0.0, 1.0) * (hi.snr_db - lo.snr_db)
    } else {
        0.5 * (lo.snr_db + hi.snr_db)
    };
    Ok(ThresholdResult {
        scheme: scheme_config.label(),
        snr_lim_db,
        ci_low_db: lo.snr_db,
        ci_high_db: hi.snr_db,
        probes,
    })
}

impl ThresholdResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scheme", "snr_db", "frames", "bits", "errors", "frame_errors", "ber_post", "ci_low", "ci_high", "verdict", "above",
        ])?;
        for p in &self.probes {
            w.write_record([
                self.scheme.clone(),
                p.snr_db.to_string(),
                p.frames.to_string(),
                p.bits.to_string(),
                p.errors.to_string(),
                p.frame_errors.to_string(),
                p.ber.to_string(),
                p.ci_low.to_string(),
                p.ci_high.to_string(),
                format!("{:?}", p.verdict).to_lowercase(),
                p.above.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// BER_pre, ASI and Q-factors of captured L-values; the fields that need a
/// channel model are NaN.
pub fn analyze_llr(frame: &LValueFrame) -> Result<MetricsReport> {
    if frame.is_empty() {
        return Err(Error::domain("L-value file has no rows"));
    }
    let errors = frame
        .hard_decisions()
        .iter()
        .zip(frame.bits())
        .filter(|(a, b)| a != b)
        .count();
    let asi = asi_from_lvalues(frame.symmetrized())?;
    Ok(MetricsReport {
        snr_tr_db: f64::NAN,
        snr_aux_db: f64::NAN,
        relative_snr_db: f64::NAN,
        frames: 1,
        total_bits: frame.len() as u64,
        ber_pre: errors as f64 / frame.len() as f64,
        ser: f64::NAN,
        asi,
        ngmi: asi,
        gmi: f64::NAN,
        mi_bits: f64::NAN,
        q_ber_db: f64::NAN,
        q_asi_db: f64::NAN,
        ber_post: f64::NAN,
        ber_e2e: f64::NAN,
    }
    .with_q_factors())
}
