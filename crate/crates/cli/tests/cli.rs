//! End-to-end tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irsbeam"))
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("irsbeam-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_pattern_csv(path: &Path) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "theta_deg,normalized_power");
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

fn field(out: &str, key: &str) -> String {
    out.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")).map(str::to_owned))
        .unwrap_or_else(|| panic!("missing {key} in `{out}`"))
}

#[test]
fn pattern_near_peaks_at_focus() {
    let dir = tmp_dir("near");
    let out_path = dir.join("near.csv");
    let out = bin()
        .args([
            "pattern", "--kind", "near", "--theta", "0", "--d", "6", "--n", "256", "--lambda",
            "0.01", "--out",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_pattern_csv(&out_path);
    assert_eq!(rows.len(), 3600);
    let max = rows
        .iter()
        .cloned()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    assert_eq!(max.0, 0.0);
    assert!((max.1 - 1.0).abs() < 1e-9, "peak {max:?}");
}

#[test]
fn pattern_far_is_broadened_below_one() {
    let dir = tmp_dir("far");
    let out_path = dir.join("far.csv");
    let out = bin()
        .args([
            "pattern", "--kind", "far", "--theta", "20", "--d", "6", "--n", "256", "--out",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = read_pattern_csv(&out_path);
    let peak = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);
    assert!(peak < 0.5, "far-field peak {peak} should be well below 1");
}

#[test]
fn pattern_random_sits_at_inverse_n() {
    let dir = tmp_dir("random");
    let out_path = dir.join("random.csv");
    let out = bin()
        .args([
            "pattern",
            "--kind",
            "random",
            "--theta",
            "0",
            "--d",
            "6",
            "--n",
            "256",
            "--c",
            "500",
            "--grid-step-deg",
            "0.25",
            "--out",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = read_pattern_csv(&out_path);
    let mean = rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64;
    let flat = 1.0 / 256.0;
    assert!((mean - flat).abs() < 0.1 * flat, "mean {mean} vs {flat}");
}

#[test]
fn pattern_rejects_radius_beyond_rayleigh() {
    // Rayleigh distance for N=256, λ=0.01 is 327.68 m.
    let out = bin()
        .args([
            "pattern", "--kind", "near", "--theta", "0", "--d", "6", "--radius", "400", "--n",
            "256",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Rayleigh"), "stderr: {err}");
}

#[test]
fn train_perfect_csi_has_zero_overhead() {
    let out = bin()
        .args(["train", "--scheme", "perfect_csi", "--theta", "10", "--d", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "overhead"), "0");
    assert_eq!(field(&text, "d_hat"), "3.000000");
}

#[test]
fn train_two_phase_overhead_230() {
    let out = bin()
        .args([
            "train", "--scheme", "two_phase", "--theta", "10", "--d", "3", "--k", "3", "--s",
            "10",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "overhead"), "230");
}

#[test]
fn train_two_layer_noiseless_hits_the_angle_bin() {
    let dir = tmp_dir("train");
    let csv = dir.join("train.csv");
    let out = bin()
        .args([
            "train", "--scheme", "two_layer", "--theta", "10", "--d", "3", "--c", "4096",
            "--sigma2", "0", "--seed", "1", "--csv",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(field(&text, "overhead"), "201");
    let theta_hat: f64 = field(&text, "theta_hat_deg").parse().unwrap();
    let sin_err = (theta_hat.to_radians().sin() - 10f64.to_radians().sin()).abs();
    assert!(sin_err <= 2.0 / 200.0, "sin error {sin_err}");
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("scheme,d_true,theta_true_deg,d_hat,"));
    assert!(csv_text.lines().count() == 2);
}

#[test]
fn train_rejects_unknown_scheme() {
    let out = bin()
        .args(["train", "--scheme", "bogus", "--theta", "0", "--d", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scheme"));
}

#[test]
fn usage_errors_exit_one() {
    let out = bin().args(["train", "--scheme"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sweep_smoke_is_fast_and_byte_deterministic() {
    let dir_a = tmp_dir("sweep-a");
    let dir_b = tmp_dir("sweep-b");
    let spec = specs_dir().join("smoke.spec");
    let start = Instant::now();
    for dir in [&dir_a, &dir_b] {
        let out = bin()
            .args(["sweep"])
            .arg(&spec)
            .arg("--out-dir")
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "two smoke sweeps too slow");
    let csv_a = std::fs::read(dir_a.join("smoke.csv")).unwrap();
    let csv_b = std::fs::read(dir_b.join("smoke.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let json_a = std::fs::read(dir_a.join("smoke.json")).unwrap();
    let json_b = std::fs::read(dir_b.join("smoke.json")).unwrap();
    assert_eq!(json_a, json_b);
    // 3 schemes × 2 points + header
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().count(), 7);
    let json: String = String::from_utf8(json_a).unwrap();
    assert!(json.contains("\"spec\""), "spec embedded for provenance");
}

#[test]
fn sweep_rejects_malformed_spec_naming_the_field() {
    let dir = tmp_dir("badspec");
    let path = dir.join("bad.spec");
    std::fs::write(&path, "axis = reference_snr_db\npoints = 10\nschemes = dft\ntrials = x\n")
        .unwrap();
    let out = bin().args(["sweep"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn sweep_env_var_sets_output_dir() {
    let dir = tmp_dir("envdir");
    let out = bin()
        .args(["sweep"])
        .arg(specs_dir().join("smoke.spec"))
        .env("IRSBEAM_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("smoke.csv").exists());
    assert!(dir.join("smoke.json").exists());
}

#[test]
fn lemma1_check_reports_pass() {
    let out = bin()
        .args([
            "lemma1-check",
            "--n",
            "64",
            "--codewords",
            "20000",
            "--c",
            "200",
            "--samples",
            "150",
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("lemma1-check: PASS"), "{text}");
}

#[test]
fn bundled_fig4_specs_parse() {
    // Validate-only: parse both bundled specs through the same code path the
    // sweep command uses, without paying for the full runs here.
    for name in ["fig4_snr.spec", "fig4_distance.spec"] {
        let text = std::fs::read_to_string(specs_dir().join(name)).unwrap();
        irsbeam::ExperimentSpec::from_flat_str(&text).unwrap();
    }
}
