//! Fixtures shared by the benchmarks.

use qfactor_core::schemes::{frame_rng, FrameResult, Scheme, SchemeConfig};

/// One received frame of `config` at matched `snr_db`.
pub fn received_frame(config: SchemeConfig, snr_db: f64, seed: u64) -> (Scheme, FrameResult) {
    let scheme = Scheme::new(config).expect("valid scheme");
    let point = scheme.operating_point(snr_db, snr_db).expect("valid SNR");
    let frame = scheme
        .run_frame(&point, &mut frame_rng(seed, 0, 0))
        .expect("frame runs");
    (scheme, frame)
}

/// Decoder input of a frame, in codeword order.
pub fn code_llrs(scheme: &Scheme, frame: &FrameResult) -> Vec<f64> {
    use qfactor_core::schemes::Slot;
    let l = frame.lvalues.llrs();
    let mut out = vec![0.0; scheme.code().n()];
    let mut next = 0;
    for slot in scheme.slots() {
        match *slot {
            Slot::Filler => continue,
            Slot::Code(c) => out[c as usize] = l[next],
            Slot::Uncoded(_) => {}
        }
        next += 1;
    }
    out
}
