//! End-to-end tests of the command-line interface: exit codes, CSV
//! artifacts, config validation, and checkpoint/resume equivalence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hgoct"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hgoct-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A cheap two-level problem: coarse grid, few iterations, loose tau.
fn small_tls_config(out_dir: &Path, max_iterations: usize, tau: f64, checkpoint_every: usize) -> String {
    format!(
        r#"{{
  "problem": {{
    "name": "small-tls",
    "levels": {{ "h0": [[1, 0], [0, 4]], "mu": [[0, 1], [1, 0]] }},
    "total_time": 100,
    "n_t": 256,
    "field_filter": "20 * sech(20 * (w - 1)^4)",
    "target_filter": "exp(-10 * (w - 3)^2)",
    "initial_field": "sech(20 * (w - 1)^4)",
    "k_init": 0.5,
    "tau": {tau}
  }},
  "out": "{}",
  "max_iterations": {max_iterations},
  "checkpoint_every": {checkpoint_every}
}}"#,
        out_dir.display()
    )
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn max_iterations_zero_emits_initial_outputs() {
    let dir = tmp_dir("cap0");
    let out = bin()
        .args(["run", "--problem", "tls", "--max-iterations", "0", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    for f in ["field_spectrum.csv", "dipole_spectrum.csv", "field_signal.csv", "convergence.csv", "summary.txt"] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    // No iterations ran: the convergence table is just its header.
    let rows = read_csv(&dir.join("convergence.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "iter");
    // The emitted spectrum is the initial guess: a unit-height band at w = 1.
    let spec = read_csv(&dir.join("field_spectrum.csv"));
    let peak = spec[1..]
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .fold(f64::MIN, f64::max);
    assert!((peak - 1.0).abs() < 1e-6, "initial spectrum peak {peak}");
}

#[test]
fn inline_run_writes_monotone_history() {
    let dir = tmp_dir("inline");
    let cfg_path = dir.join("run.json");
    std::fs::write(&cfg_path, small_tls_config(&dir.join("out"), 3, 1e-12, 0)).unwrap();
    let out = bin()
        .args(["run", "--problem", &format!("file:{}", cfg_path.display())])
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let rows = read_csv(&dir.join("out/convergence.csv"));
    assert_eq!(rows.len(), 4, "expected 3 iterations");
    let js: Vec<f64> = rows[1..].iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(js.windows(2).all(|w| w[1] > w[0]), "J_total not increasing: {js:?}");
    // Full-precision CSV: values survive a parse/format roundtrip.
    for r in &rows[1..] {
        for cell in &r[1..] {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), *cell);
        }
    }
}

#[test]
fn checkpoint_resume_reproduces_run_bit_for_bit() {
    let dir = tmp_dir("resume");
    let out_dir = dir.join("out");
    let cfg_path = dir.join("run.json");
    std::fs::write(&cfg_path, small_tls_config(&out_dir, 4, 1e-12, 2)).unwrap();
    let out = bin()
        .args(["run", "--problem", &format!("file:{}", cfg_path.display())])
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let full_history = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    let full_spectrum = std::fs::read_to_string(out_dir.join("field_spectrum.csv")).unwrap();

    // Continue from the snapshot taken after iteration 2.
    let midpoint = out_dir.join("checkpoint_000002.json");
    assert!(midpoint.exists());
    let out = bin().arg("resume").arg(&midpoint).output().unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let resumed_history = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    let resumed_spectrum = std::fs::read_to_string(out_dir.join("field_spectrum.csv")).unwrap();
    assert_eq!(resumed_history, full_history);
    assert_eq!(resumed_spectrum, full_spectrum);
}

#[test]
fn resume_of_finished_run_exits_converged() {
    let dir = tmp_dir("resume-done");
    let out_dir = dir.join("out");
    let cfg_path = dir.join("run.json");
    // Loose tolerance: the first iteration's relative change already passes.
    std::fs::write(&cfg_path, small_tls_config(&out_dir, 50, 0.9, 1)).unwrap();
    let out = bin()
        .args(["run", "--problem", &format!("file:{}", cfg_path.display())])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let out = bin().arg("resume").arg(out_dir.join("checkpoint.json")).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("Converged after 0 iterations") || stdout(&out).contains("Converged"));
}

#[test]
fn tampered_checkpoint_is_rejected() {
    let dir = tmp_dir("tamper");
    let out_dir = dir.join("out");
    let cfg_path = dir.join("run.json");
    std::fs::write(&cfg_path, small_tls_config(&out_dir, 1, 1e-12, 1)).unwrap();
    let out = bin()
        .args(["run", "--problem", &format!("file:{}", cfg_path.display())])
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let cp_path = out_dir.join("checkpoint.json");
    let tampered = std::fs::read_to_string(&cp_path).unwrap().replace("\"n_t\": 256", "\"n_t\": 128");
    std::fs::write(&cp_path, tampered).unwrap();
    let out = bin().arg("resume").arg(&cp_path).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("hash mismatch"), "stderr: {}", stderr(&out));
}

#[test]
fn validate_accepts_builtins_and_reports_violations() {
    let dir = tmp_dir("validate");
    let ok_path = dir.join("ok.json");
    std::fs::write(&ok_path, r#"{ "problem": "tls" }"#).unwrap();
    let out = bin().arg("validate").arg(&ok_path).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("ok"));

    // Negative target filter is rejected with a named violation.
    let bad_path = dir.join("bad-filter.json");
    std::fs::write(&bad_path, small_tls_config(&dir, 1, 1e-3, 0).replace(
        r#""target_filter": "exp(-10 * (w - 3)^2)""#,
        r#""target_filter": "0 - exp(-10 * (w - 3)^2)""#,
    ))
    .unwrap();
    let out = bin().arg("validate").arg(&bad_path).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).to_lowercase().contains("negative") || stdout(&out).to_lowercase().contains("filter"),
        "stdout: {}", stdout(&out));

    // Initial field with support where the field filter is zero.
    let confined_path = dir.join("bad-support.json");
    std::fs::write(&confined_path, small_tls_config(&dir, 1, 1e-3, 0).replace(
        r#""field_filter": "20 * sech(20 * (w - 1)^4)""#,
        r#""field_filter": "20 * theta(1.5 - w) * theta(w - 0.5)""#,
    ))
    .unwrap();
    let out = bin().arg("validate").arg(&confined_path).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("filter"), "stdout: {}", stdout(&out));
}

#[test]
fn config_errors_exit_2() {
    let dir = tmp_dir("cfg-err");
    // Unknown builtin.
    let out = bin().args(["run", "--problem", "nosuch"]).output().unwrap();
    assert_eq!(code(&out), 2);
    // Unparseable expression.
    let cfg_path = dir.join("broken.json");
    std::fs::write(&cfg_path, small_tls_config(&dir, 1, 1e-3, 0).replace(
        r#""initial_field": "sech(20 * (w - 1)^4)""#,
        r#""initial_field": "sech(20 * (q - 1)^4)""#,
    ))
    .unwrap();
    let out = bin()
        .args(["run", "--problem", &format!("file:{}", cfg_path.display())])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    // Bad thread cap.
    let out = bin()
        .env("HGOCT_THREADS", "many")
        .args(["run", "--problem", "tls", "--max-iterations", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn full_tls_run_converges_with_band_limited_emission_peak() {
    let dir = tmp_dir("tls-full");
    let out = bin()
        .args(["run", "--problem", "tls", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rows = read_csv(&dir.join("dipole_spectrum.csv"));
    let (mut peak_w, mut peak_v) = (0.0f64, f64::MIN);
    for r in &rows[1..] {
        let w: f64 = r[0].parse().unwrap();
        let v: f64 = r[1].parse::<f64>().unwrap().abs();
        if v > peak_v {
            peak_v = v;
            peak_w = w;
        }
    }
    assert!((2.7..=3.3).contains(&peak_w), "dipole peak at {peak_w}");
    let rows = read_csv(&dir.join("convergence.csv"));
    let js: Vec<f64> = rows[1..].iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(js.windows(2).all(|w| w[1] > w[0]), "J_total not increasing");
}
