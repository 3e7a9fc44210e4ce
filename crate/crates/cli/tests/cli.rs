use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qfactor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfactor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("experiment.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const QUICK: &str = r#"
frames = 4
seed = 3

[scheme]
kind = "bicm_uniform"
order = 16
code = "short648"

[grid]
start_db = 9.0
stop_db = 10.0
step_db = 0.5
"#;

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out = dir.path().join("sweep.csv");
    let o = qfactor(&["sweep", "--config", &cfg, "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,scenario,snr_tr_db,snr_aux_db,relative_snr_db,frames,ber_pre,ser,asi,ngmi,mi_bits,q_ber_db,q_asi_db,ber_post,ber_e2e,seed"
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn sweep_output_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let mut outputs = Vec::new();
    for w in ["1", "4"] {
        let out = dir.path().join(format!("w{w}.csv"));
        let o = qfactor(&["sweep", "--config", &cfg, "--workers", w, "--output", out.to_str().unwrap()]);
        assert!(o.status.success());
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let o = qfactor(&["sweep", "--config", &cfg, "--frames", "1", "--seed", "11", "--mode", "max-log"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "1");
    assert_eq!(row[15], "11");
}

#[test]
fn single_point_grid_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &QUICK.replace("stop_db = 10.0", "stop_db = 9.0"),
    );
    let o = qfactor(&["sweep", "--config", &cfg]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
}

#[test]
fn analyze_llr_reads_csv_and_reports_q_factors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("capture.csv");
    let mut body = String::from("bit_position,transmitted_bit,L\n");
    for i in 0..100 {
        body.push_str(&format!("{i},{},{}\n", i % 2, if i % 2 == 0 { 20.0 } else { -20.0 }));
    }
    fs::write(&path, body).unwrap();
    let o = qfactor(&["analyze-llr", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 100.0);
    assert_eq!(row[1], 0.0);
    assert!((row[2] - 1.0).abs() < 1e-8);
}

#[test]
fn analyze_llr_names_the_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("capture.csv");
    fs::write(&path, "bit_position,transmitted_bit,L\n0,0,1.5\n1,2,0.3\n").unwrap();
    let o = qfactor(&["analyze-llr", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn export_constellation_lists_every_point() {
    let o = qfactor(&["export-constellation"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,i,q,prior,label");
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "frames = 0\n");
    assert_eq!(qfactor(&["sweep", "--config", &bad]).status.code(), Some(2));

    let cfg = write_config(dir.path(), QUICK);
    let unwritable = dir.path().join("missing").join("out.csv");
    let o = qfactor(&["sweep", "--config", &cfg, "--output", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(qfactor(&["analyze-llr", "/nonexistent/capture.csv"]).status.code(), Some(3));

    let bracket = write_config(
        dir.path(),
        &format!("{QUICK}\n[threshold]\nlow_db = 20.0\nhigh_db = 22.0\nmin_frames = 2\nmax_frames = 2\n"),
    );
    assert_eq!(qfactor(&["threshold", "--config", &bracket]).status.code(), Some(4));
}
