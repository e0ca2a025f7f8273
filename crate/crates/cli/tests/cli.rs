//! End-to-end CLI behavior: exit codes, output shapes, CUT selection.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ignli"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_ok_exits_zero() {
    let out = binary()
        .args(["validate", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "OK");
}

#[test]
fn validate_violation_exits_one() {
    let out = binary()
        .args(["validate", "--link"])
        .arg(data("overdriven-srs.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("perturbative regime violated"), "{err}");
}

#[test]
fn validate_missing_file_exits_two() {
    let out = binary()
        .args(["validate", "--link", "no-such-file.yaml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compute_emits_single_row() {
    let out = binary()
        .args(["compute", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("cut_frequency_THz,"));
    assert!(lines[1].starts_with("1.93100000e2,"));
}

#[test]
fn compute_on_overdriven_srs_exits_one() {
    let out = binary()
        .args(["compute", "--link"])
        .arg(data("overdriven-srs.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_emits_row_per_channel_ascending() {
    let out = binary()
        .args(["sweep", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let freqs: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(freqs.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn compute_matches_sweep_row() {
    let sweep = binary()
        .args(["sweep", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    let sweep_lines: Vec<String> = stdout(&sweep).lines().map(str::to_string).collect();
    for (k, expected) in sweep_lines[1..].iter().enumerate() {
        let compute = binary()
            .args(["compute", "--cut", &k.to_string(), "--link"])
            .arg(data("minimal.yaml"))
            .output()
            .unwrap();
        let lines: Vec<String> = stdout(&compute).lines().map(str::to_string).collect();
        assert_eq!(&lines[1], expected, "channel {k}");
    }
}

#[test]
fn compute_accepts_cut_in_terahertz() {
    let by_index = binary()
        .args(["compute", "--cut", "2", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    let by_freq = binary()
        .args(["compute", "--cut", "193.2", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    assert_eq!(stdout(&by_index), stdout(&by_freq));
    let missing = binary()
        .args(["compute", "--cut", "195.0", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8(missing.stderr)
        .unwrap()
        .contains("CUT frequency not found"));
}

#[test]
fn gsnr_column_filled_when_ase_given() {
    let out = binary()
        .args(["compute", "--ase-dbm", "-20", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let gsnr_field = row.split(',').nth(3).unwrap();
    let gsnr_db: f64 = gsnr_field.parse().unwrap();
    assert!(gsnr_db > 0.0);
}

#[test]
fn fit_srs_prints_channel_table() {
    let out = binary()
        .args(["fit-srs", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("span,channel,center_THz,alpha1_dB_km,sigma_per_km"));
    // Low-frequency channel gains power: negative alpha1.
    let first: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    let last: f64 = lines[3].split(',').nth(3).unwrap().parse().unwrap();
    assert!(first < 0.0 && last > 0.0);
}

#[test]
fn compare_oracle_rational_is_tight() {
    let out = binary()
        .args(["compare-oracle", "--tier", "rational", "--rel-tol", "1e-9", "--link"])
        .arg(data("minimal.yaml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        let rel: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
        assert!(rel <= 1e-7, "{row}");
    }
}

#[test]
fn writes_output_file() {
    let dir = std::env::temp_dir().join("ignli-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let out = binary()
        .args(["compute", "--link"])
        .arg(data("minimal.yaml"))
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
}
