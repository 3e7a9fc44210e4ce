use qfactor_core::experiment::{run_sweep, ExperimentConfig, SnrGrid};
use qfactor_core::schemes::{frame_rng, FrameCounts, Scheme, SchemeConfig, Slot, StageTwoConditioning};

#[test]
fn uniform_16qam_one_db_above_threshold_is_error_free() {
    let scheme = Scheme::new(SchemeConfig::bicm_uniform(16)).unwrap();
    let point = scheme.operating_point(11.9, 11.9).unwrap();
    let mut total = FrameCounts::default();
    for f in 0..100 {
        total.merge(&scheme.run_frame(&point, &mut frame_rng(21, 0, f)).unwrap().counts);
    }
    assert_eq!(total.frames, 100);
    assert_eq!(total.errors_post, 0);
    assert_eq!(total.errors_e2e, 0);
    assert!(total.ber_pre() > 1e-2);
}

#[test]
fn matched_16qam_waterfall_is_monotone() {
    let cfg = ExperimentConfig {
        scheme: SchemeConfig::bicm_uniform(16),
        grid: SnrGrid::new(9.9, 11.9, 0.5),
        frames: 100,
        seed: 5,
        ..Default::default()
    };
    let sweep = run_sweep(&cfg).unwrap();
    let post: Vec<f64> = sweep.points.iter().map(|p| p.report.ber_post).collect();
    for w in post.windows(2) {
        // Noise allowance: a single failed frame at the lower point.
        assert!(w[1] <= w[0] + 1e-3, "{post:?}");
    }
    assert!(post[0] > 1e-2);
    assert_eq!(*post.last().unwrap(), 0.0);
    let pre: Vec<f64> = sweep.points.iter().map(|p| p.report.ber_pre).collect();
    assert!(pre.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn shaped_bicm_reaches_the_32qam_rate_minus_matcher_loss() {
    let scheme = Scheme::new(SchemeConfig::bicm_ps(5.2)).unwrap();
    let loss = scheme.ccdm().unwrap().config().rate_loss();
    let entropy = scheme.spec().symbol_entropy();
    let expected = entropy - 0.2 * 6.0 - 2.0 * loss;
    assert!((scheme.information_rate() - expected).abs() < 1e-2);
    assert!((entropy - 5.2).abs() < 0.02);
    assert!(scheme.information_rate() > 3.85 && scheme.information_rate() < 4.0);
}

#[test]
fn conditioning_on_correct_signs_helps_amplitude_decisions() {
    let scheme = Scheme::new(SchemeConfig {
        stage_two: StageTwoConditioning::Genie,
        ..SchemeConfig::mlc_ps(4.6)
    })
    .unwrap();
    let point = scheme.operating_point(14.0, 14.0).unwrap();
    let m = scheme.spec().bits_per_symbol();
    let (mut conditioned, mut unconditioned, mut total) = (0u64, 0u64, 0u64);
    for f in 0..3 {
        let r = scheme.run_frame(&point, &mut frame_rng(8, 0, f)).unwrap();
        let stage_two = r.stage_two_bits.as_ref().unwrap();
        let l = r.lvalues.llrs();
        let bits = r.lvalues.bits();
        for (j, slot) in scheme.slots().iter().enumerate() {
            if let Slot::Uncoded(u) = *slot {
                let sent = bits[j];
                conditioned += (stage_two[u as usize] != sent) as u64;
                unconditioned += ((l[j] < 0.0) as u8 != sent) as u64;
                total += 1;
            }
        }
    }
    assert_eq!(total as usize, 3 * scheme.symbols_per_frame() * (m - 2));
    assert!(conditioned <= unconditioned, "{conditioned} > {unconditioned}");
}

#[test]
fn symbol_errors_bound_every_bit_level() {
    for (cfg, snr) in [
        (SchemeConfig::bicm_uniform(16), 9.0),
        (SchemeConfig::bicm_uniform(64), 14.0),
        (SchemeConfig::bicm_ps(5.2), 11.0),
    ] {
        let scheme = Scheme::new(cfg).unwrap();
        let point = scheme.operating_point(snr, snr).unwrap();
        let m = scheme.spec().bits_per_symbol();
        let mut level_errors = vec![0u64; m];
        let mut counts = FrameCounts::default();
        for f in 0..2 {
            let r = scheme.run_frame(&point, &mut frame_rng(9, 0, f)).unwrap();
            for (j, (&l, &b)) in r.lvalues.llrs().iter().zip(r.lvalues.bits()).enumerate() {
                level_errors[j % m] += ((l < 0.0) as u8 != b) as u64;
            }
            counts.merge(&r.counts);
        }
        let worst = *level_errors.iter().max().unwrap() as f64 / counts.symbols as f64;
        assert!(counts.ser() >= worst, "SER {} < level BER {}", counts.ser(), worst);
    }
}

#[test]
fn frames_are_identical_for_identical_seeds() {
    let scheme = Scheme::new(SchemeConfig::bicm_uniform(32)).unwrap();
    let point = scheme.operating_point(13.5, 13.0).unwrap();
    let a = scheme.run_frame(&point, &mut frame_rng(4, 7, 1)).unwrap();
    let b = scheme.run_frame(&point, &mut frame_rng(4, 7, 1)).unwrap();
    assert_eq!(a.codeword, b.codeword);
    assert_eq!(a.observations, b.observations);
    assert_eq!(a.lvalues, b.lvalues);
    assert_eq!(a.decode.bits, b.decode.bits);
    assert_eq!(a.counts, b.counts);
}
