//! Acceptance gate. Each test evaluates one criterion and prints a single
//! `PASS` or `FAIL` line to the terminal, bypassing output capture. A red
//! criterion does not abort the run; only harness errors do.

use std::io::Write;
use std::sync::OnceLock;

use qfactor_core::channel::DmcModel;
use qfactor_core::constellation::{ConstellationSpec, Labeling};
use qfactor_core::demapper::{AuxChannel, DemapMode, LlrQuantizer, LlrTable};
use qfactor_core::experiment::{
    find_threshold, run_sweep, ExperimentConfig, Scenario, SnrGrid, ThresholdConfig,
    ThresholdResult,
};
use qfactor_core::fec::CodeId;
use qfactor_core::math::log2_1p_exp_neg;
use qfactor_core::metrics::{j_eval, j_inverse, mi_bitwise, mi_symbolwise, mi_unquantized, AsiAccumulator};
use qfactor_core::schemes::{frame_rng, Scheme, SchemeConfig};
use qfactor_core::shaping::{Ccdm, CcdmConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SEED: u64 = 1;

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn report(id: &str, pass: bool, detail: impl AsRef<str>) {
    let line = format!(
        "acceptance criterion {id}: {} ({})\n",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    let mut err = std::io::stderr().lock();
    err.write_all(line.as_bytes()).unwrap();
    err.flush().unwrap();
}

struct Target {
    name: &'static str,
    scheme: SchemeConfig,
    reference_db: f64,
}

fn target(name: &str) -> Target {
    match name {
        "16-QAM" => Target { name: "16-QAM", scheme: SchemeConfig::bicm_uniform(16), reference_db: 10.9 },
        "32-QAM" => Target { name: "32-QAM", scheme: SchemeConfig::bicm_uniform(32), reference_db: 13.9 },
        "64-QAM" => Target { name: "64-QAM", scheme: SchemeConfig::bicm_uniform(64), reference_db: 16.3 },
        "128-QAM" => Target { name: "128-QAM", scheme: SchemeConfig::bicm_uniform(128), reference_db: 19.0 },
        "BICM PS-64-QAM" => Target { name: "BICM PS-64-QAM", scheme: SchemeConfig::bicm_ps(5.2), reference_db: 13.0 },
        _ => Target { name: "MLC PS-64-QAM", scheme: SchemeConfig::mlc_ps(4.6), reference_db: 13.4 },
    }
}

fn threshold_config(centre: f64, fixed_aux_db: Option<f64>) -> ThresholdConfig {
    ThresholdConfig {
        low_db: centre - 1.5,
        high_db: centre + 1.5,
        fixed_aux_db,
        ..Default::default()
    }
}

fn search(t: &Target) -> ThresholdResult {
    find_threshold(&t.scheme, &threshold_config(t.reference_db, None), SEED, workers())
        .unwrap_or_else(|e| panic!("{}: {e}", t.name))
}

/// Matched thresholds of the mandatory schemes, shared between criteria.
fn mandatory_thresholds() -> &'static Vec<(Target, ThresholdResult)> {
    static CELL: OnceLock<Vec<(Target, ThresholdResult)>> = OnceLock::new();
    CELL.get_or_init(|| {
        ["16-QAM", "64-QAM", "BICM PS-64-QAM"]
            .into_iter()
            .map(|n| {
                let t = target(n);
                let r = search(&t);
                (t, r)
            })
            .collect()
    })
}

fn threshold_line(t: &Target, r: &ThresholdResult) {
    let err = r.snr_lim_db - t.reference_db;
    report(
        &format!("1 [{}]", t.name),
        err.abs() <= 0.3,
        format!(
            "SNR_lim {:.3} dB, bracket [{:.3}, {:.3}], target {:.1} +/- 0.3 dB, offset {:+.3} dB",
            r.snr_lim_db, r.ci_low_db, r.ci_high_db, t.reference_db, err
        ),
    );
}

#[test]
fn criterion_1_thresholds() {
    for (t, r) in mandatory_thresholds() {
        threshold_line(t, r);
    }
}

#[test]
#[ignore = "slow suite: 32-QAM, 128-QAM and MLC thresholds"]
fn criterion_1_thresholds_slow_suite() {
    for n in ["32-QAM", "128-QAM", "MLC PS-64-QAM"] {
        let t = target(n);
        let r = search(&t);
        threshold_line(&t, &r);
    }
}

#[test]
fn criterion_2_fig2_behaviour() {
    let snr_lim = 13.0;
    let base = ExperimentConfig {
        scheme: SchemeConfig::bicm_ps(5.2),
        grid: SnrGrid::new(11.0, 17.0, 0.5),
        snr_lim_db: Some(snr_lim),
        frames: 4,
        seed: SEED,
        workers: workers(),
        ..Default::default()
    };
    let matched = run_sweep(&base).unwrap();
    let fixed = run_sweep(&ExperimentConfig {
        scenario: Scenario::FixedAux,
        ..base.clone()
    })
    .unwrap();

    let mut high_gap: f64 = 0.0;
    let mut low_ok = true;
    let mut pointwise_ok = true;
    let mut max_dq_ber: f64 = 0.0;
    let mut worst_dq_at = 0.0;
    let mut gap_at_plus4 = f64::NAN;
    for (m, f) in matched.points.iter().zip(&fixed.points) {
        let (m, f) = (&m.report, &f.report);
        let tr = m.snr_tr_db;
        if tr >= snr_lim + 2.0 - 1e-9 {
            high_gap = high_gap.max((m.q_asi_db - m.q_ber_db).abs());
        }
        if tr <= snr_lim + 1e-9 && m.q_asi_db < m.q_ber_db {
            low_ok = false;
        }
        if f.q_asi_db > m.q_asi_db + 1e-12 {
            pointwise_ok = false;
        }
        let dq = (f.q_ber_db - m.q_ber_db).abs();
        if dq > max_dq_ber {
            max_dq_ber = dq;
            worst_dq_at = tr;
        }
        if (tr - (snr_lim + 4.0)).abs() < 1e-9 {
            gap_at_plus4 = m.q_asi_db - f.q_asi_db;
        }
    }
    report(
        "2 [matched |Q_ASI - Q_BER| <= 0.3 dB above SNR_lim + 2 dB]",
        high_gap <= 0.3,
        format!("max gap {high_gap:.3} dB"),
    );
    report(
        "2 [matched Q_ASI >= Q_BER at or below SNR_lim]",
        low_ok,
        "SNR_tr 11.0 to 13.0 dB",
    );
    report(
        "2 [fixed-aux Q_ASI <= matched Q_ASI pointwise]",
        pointwise_ok,
        "SNR_tr 11.0 to 17.0 dB, SNR_aux 13.0 dB",
    );
    report(
        "2 [fixed-aux Q_ASI gap >= 0.2 dB at SNR_lim + 4 dB]",
        gap_at_plus4 >= 0.2,
        format!("gap {gap_at_plus4:.3} dB"),
    );
    report(
        "2 [fixed-aux |dQ_BER| <= 0.05 dB across the grid]",
        max_dq_ber <= 0.05,
        format!("max |dQ_BER| {max_dq_ber:.3} dB at SNR_tr {worst_dq_at:.1} dB"),
    );
}

#[test]
fn criterion_3_soft_q_tracks_the_threshold() {
    let mut q_ber = Vec::new();
    let mut q_asi = Vec::new();
    let mut detail = Vec::new();
    for (t, matched) in mandatory_thresholds() {
        let lim = matched.snr_lim_db;
        // The fixed-aux crossing is searched separately with SNR_aux = SNR_lim.
        let fixed = find_threshold(
            &t.scheme,
            &ThresholdConfig {
                low_db: lim - 1.0,
                high_db: lim + 1.0,
                ..threshold_config(lim, Some(lim))
            },
            SEED,
            workers(),
        )
        .unwrap();
        for (scenario, crossing) in [(Scenario::Matched, lim), (Scenario::FixedAux, fixed.snr_lim_db)] {
            let cfg = ExperimentConfig {
                scheme: t.scheme.clone(),
                scenario,
                grid: SnrGrid::single(crossing),
                snr_lim_db: Some(lim),
                frames: 20,
                seed: SEED,
                workers: workers(),
                ..Default::default()
            };
            let r = run_sweep(&cfg).unwrap().points[0].report.clone();
            detail.push(format!(
                "{} {}: SNR {:.3} Q_BER {:.3} Q_ASI {:.3}",
                t.name,
                scenario.name(),
                crossing,
                r.q_ber_db,
                r.q_asi_db
            ));
            q_ber.push(r.q_ber_db);
            q_asi.push(r.q_asi_db);
        }
    }
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (sb, sa) = (spread(&q_ber), spread(&q_asi));
    for d in &detail {
        let mut err = std::io::stderr().lock();
        writeln!(err, "  {d}").unwrap();
    }
    report(
        "3 [Q_ASI spread < Q_BER spread at post-FEC BER 1e-4]",
        sa < sb,
        format!("Q_ASI spread {sa:.3} dB, Q_BER spread {sb:.3} dB"),
    );
    report(
        "3 [Q_ASI spread <= 0.15 dB]",
        sa <= 0.15,
        format!("{sa:.3} dB"),
    );
    report(
        "3 [Q_BER spread >= 0.15 dB]",
        sb >= 0.15,
        format!("{sb:.3} dB"),
    );
}

#[test]
fn criterion_4_max_log_decisions_ignore_aux_snr() {
    let symbols = 1_000_000;
    let mut all_identical = true;
    let mut detail = Vec::new();
    for (order, tr) in [(16, 10.9), (32, 13.9), (64, 16.3), (128, 19.0)] {
        let spec = ConstellationSpec::uniform_qam(order, Labeling::Gray).unwrap();
        let m = spec.bits_per_symbol();
        let channel = DmcModel::build(&spec, tr, 7).unwrap();
        let tables: Vec<LlrTable> = [tr - 3.0, tr, tr + 3.0]
            .iter()
            .map(|&aux| {
                let aux = AuxChannel::new(&spec, aux, channel.quantizer()).unwrap();
                LlrTable::build(&spec, &aux, DemapMode::MaxLog).processed(&LlrQuantizer::default())
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + order as u64);
        let mut errors = [0u64; 3];
        let mut mismatches = 0u64;
        for _ in 0..symbols {
            let s = rng.random_range(0..order);
            let obs = channel.sample(s, &mut rng);
            let reference = tables[1].llrs(obs);
            for (t, table) in tables.iter().enumerate() {
                let l = table.llrs(obs);
                for k in 0..m {
                    let hard = (l[k] < 0.0) as u8;
                    errors[t] += (hard != spec.bit(s, k)) as u64;
                    mismatches += ((l[k] < 0.0) != (reference[k] < 0.0)) as u64;
                }
            }
        }
        let same = mismatches == 0 && errors[0] == errors[1] && errors[1] == errors[2];
        all_identical &= same;
        detail.push(format!("{order}-QAM errors {:?}", errors));
    }
    // The same property through the full transmitter and decoder.
    let scheme = Scheme::new(SchemeConfig {
        demap_mode: DemapMode::MaxLog,
        ..SchemeConfig::bicm_uniform(16)
    })
    .unwrap();
    let frame_errors: Vec<u64> = [7.9, 10.9, 13.9]
        .iter()
        .map(|&aux| {
            let point = scheme.operating_point(10.9, aux).unwrap();
            (0..2)
                .map(|f| scheme.run_frame(&point, &mut frame_rng(SEED, 0, f)).unwrap().counts.errors_pre)
                .sum()
        })
        .collect();
    all_identical &= frame_errors.windows(2).all(|w| w[0] == w[1]);
    detail.push(format!("16-QAM frames {:?}", frame_errors));
    report(
        "4 [max-log BER_pre identical for SNR_aux = SNR_tr - 3, SNR_tr, SNR_tr + 3 dB]",
        all_identical,
        format!("1e6 symbols per format; {}", detail.join("; ")),
    );
}

#[test]
fn criterion_5a_consistent_gaussian_asi() {
    let sigma = 2.0;
    let n = 1_000_000;
    let dist = Normal::new(sigma * sigma / 2.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut acc = AsiAccumulator::new();
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let l: f64 = dist.sample(&mut rng);
        acc.add(l);
        let loss = log2_1p_exp_neg(l);
        sum += loss;
        sum2 += loss * loss;
    }
    let mean = sum / n as f64;
    let sd = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    let asi = acc.asi().unwrap();
    let j = j_eval(sigma);
    report(
        "5a [ASI of consistent Gaussian L-values equals J(2)]",
        (asi - j).abs() <= 3.0 * sd,
        format!("ASI {asi:.6}, J(2) {j:.6}, |diff| {:.2e}, 3 sigma {:.2e}", (asi - j).abs(), 3.0 * sd),
    );
}

#[test]
fn criterion_5b_matched_ngmi_equals_bitwise_mi() {
    let spec = ConstellationSpec::uniform_qam(16, Labeling::Gray).unwrap();
    let m = spec.bits_per_symbol();
    let channel = DmcModel::build(&spec, 12.0, 7).unwrap();
    let aux = AuxChannel::new(&spec, 12.0, channel.quantizer()).unwrap();
    // Unclipped L-values: clipping and level quantization are receiver losses.
    let table = LlrTable::build(&spec, &aux, DemapMode::ExactMap).processed(&LlrQuantizer::clip_only(1e3));
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let s = rng.random_range(0..16);
        let l = table.llrs(channel.sample(s, &mut rng));
        let loss: f64 = (0..m)
            .map(|k| log2_1p_exp_neg(if spec.bit(s, k) == 0 { l[k] } else { -l[k] }))
            .sum();
        sum += loss;
        sum2 += loss * loss;
    }
    let mean = sum / n as f64;
    let sd = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    let ngmi_m = m as f64 - mean;
    let mi: f64 = mi_bitwise(&channel, &spec).iter().sum();
    report(
        "5b [matched exact-MAP NGMI * m equals bitwise MI, 16-QAM at 12 dB]",
        (ngmi_m - mi).abs() <= 3.0 * sd,
        format!("NGMI*m {ngmi_m:.5}, MI {mi:.5}, |diff| {:.2e}, 3 sigma {:.2e}", (ngmi_m - mi).abs(), 3.0 * sd),
    );
}

#[test]
fn criterion_5c_quantized_mi_below_oracle() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, spec, snr) in [
        ("16-QAM", ConstellationSpec::uniform_qam(16, Labeling::Gray).unwrap(), 12.0),
        ("64-QAM", ConstellationSpec::uniform_qam(64, Labeling::Gray).unwrap(), 16.3),
        ("PS-64-QAM", Scheme::new(SchemeConfig::bicm_ps(5.2)).unwrap().spec().clone(), 13.0),
    ] {
        let q = mi_symbolwise(&DmcModel::build(&spec, snr, 7).unwrap(), spec.prior());
        let u = mi_unquantized(&spec, snr, 48).unwrap();
        let gap = u - q;
        ok &= gap >= -1e-9 && gap <= 0.05;
        detail.push(format!("{label} at {snr} dB gap {gap:.4} bit"));
    }
    report(
        "5c [DMC symbol MI within 0.05 bit below the unquantized oracle]",
        ok,
        detail.join("; "),
    );
}

#[test]
fn criterion_6_structural_properties() {
    // CCDM: every k <= 12 bit input round-trips.
    let mut ccdm_ok = true;
    let mut inputs = 0usize;
    for comp in [vec![3, 2, 2, 1], vec![4, 3, 2], vec![3, 3, 3], vec![2, 2, 2, 1, 1]] {
        let cfg = CcdmConfig::new(comp.clone()).unwrap();
        let k = cfg.input_bits();
        assert!(k <= 12);
        let ccdm = Ccdm::new(cfg);
        for word in 0..1u32 << k {
            let bits: Vec<u8> = (0..k).rev().map(|b| ((word >> b) & 1) as u8).collect();
            let amps = ccdm.encode(&bits).unwrap();
            let mut counts = vec![0usize; comp.len()];
            amps.iter().for_each(|&a| counts[a] += 1);
            let back = ccdm.decode(&amps);
            ccdm_ok &= counts == comp && back.bits == bits && !back.flagged;
            inputs += 1;
        }
    }
    report("6 [CCDM exhaustive roundtrip, k <= 12]", ccdm_ok, format!("{inputs} inputs"));

    // LDPC: 100 random encodes satisfy every check.
    let code = CodeId::Dvbs2R45.build();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ldpc_ok = (0..100).all(|_| {
        let payload: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        code.syndrome_is_zero(&code.encode(&payload).unwrap())
    });
    report("6 [LDPC zero syndrome on 100 random encodes]", ldpc_ok, "DVB-S2 n = 64800, rate 4/5");

    // DMC rows are distributions.
    let mut worst: f64 = 0.0;
    for order in [16, 32, 64, 128] {
        let spec = ConstellationSpec::uniform_qam(order, Labeling::Gray).unwrap();
        for snr in [-10.0, 0.0, 10.9, 20.0, 40.0, 60.0] {
            for bits in [3, 7, 10] {
                let dmc = DmcModel::build(&spec, snr, bits).unwrap();
                for l in 0..dmc.axis_levels().len() {
                    worst = worst.max((dmc.row(l).iter().sum::<f64>() - 1.0).abs());
                }
            }
        }
    }
    report("6 [DMC row sums equal 1 within 1e-12]", worst <= 1e-12, format!("worst {worst:.2e}"));

    // J and its inverse.
    let worst_j = (1..=100)
        .map(|i| {
            let a = i as f64 / 101.0;
            (j_eval(j_inverse(a).unwrap()) - a).abs()
        })
        .fold(0.0, f64::max);
    report("6 [J(J^-1(a)) = a within 1e-6 on 100 points]", worst_j <= 1e-6, format!("worst {worst_j:.2e}"));

    // Sweep CSV is byte-identical for any worker count.
    let csv_for = |w: usize| {
        let cfg = ExperimentConfig {
            scheme: SchemeConfig::bicm_uniform(16),
            grid: SnrGrid::new(10.5, 11.5, 0.5),
            frames: 3,
            seed: SEED,
            workers: w,
            ..Default::default()
        };
        run_sweep(&cfg).unwrap().to_csv_string().unwrap()
    };
    let reference = csv_for(1);
    let identical = [4, 8].iter().all(|&w| csv_for(w) == reference);
    report("6 [sweep CSV byte-identical for 1, 4 and 8 workers]", identical, format!("{} bytes", reference.len()));
}
