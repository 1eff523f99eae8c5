//! End-to-end tests of the `tdet` binary: argument handling, exit codes,
//! file output, and run-to-run determinism of the CSV artifact.

use std::path::Path;
use std::process::{Command, Output};

const GEOM_CONFIG: &str = r#"{
  "preset": { "name": "geom", "params": { "r": 0.5, "s": 0.3 } },
  "n_list": [1, 2, 3],
  "kappa_list": [1],
  "mu_list": [1.0]
}"#;

fn tdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdet"))
        .args(args)
        .output()
        .expect("failed to launch tdet")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("sweep.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn sweep_writes_identical_csv_on_repeat_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GEOM_CONFIG);
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");

    for out in [&out_a, &out_b] {
        let run = tdet(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(
            run.status.success(),
            "sweep failed: {}",
            String::from_utf8_lossy(&run.stderr)
        );
    }

    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "two identical sweeps must produce identical bytes");

    let text = String::from_utf8(a).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "preset,param_json,n,kappa,mu_re,mu_im,level,quantity,value_re,value_im,\
         ref_re,ref_im,abs_err,rel_err,status"
    );
}

#[test]
fn sweep_to_stdout_keeps_csv_and_report_on_separate_streams() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GEOM_CONFIG);

    let run = tdet(&["sweep", "--config", &cfg]);
    assert!(run.status.success());

    let stdout = String::from_utf8(run.stdout).unwrap();
    let stderr = String::from_utf8(run.stderr).unwrap();
    assert!(stdout.starts_with("preset,param_json,"), "CSV goes to stdout");
    assert!(!stdout.contains("records:"), "report must not pollute the CSV");
    assert!(stderr.contains("records:"), "report goes to stderr");
}

#[test]
fn sweep_overrides_replace_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GEOM_CONFIG);
    let out = dir.path().join("n.csv");

    let run = tdet(&[
        "sweep", "--config", &cfg, "--nmax", "2", "--kappa", "0", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());

    let text = std::fs::read_to_string(&out).unwrap();
    // Spectator-free grid: n in {1, 2}, no winding rows at all.
    assert!(text.contains(",1,0,"), "n = 1 row present");
    assert!(text.contains(",2,0,"), "n = 2 row present");
    assert!(!text.contains("f_12"), "kappa 0 clears the winding grid");
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",OK"), "clean preset rows report OK: {line}");
    }
}

#[test]
fn missing_config_is_a_usage_error() {
    let run = tdet(&["sweep", "--config", "/nonexistent/sweep.json"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("tdet:"));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "preset": { "name": "geom" "#);
    let run = tdet(&["sweep", "--config", &cfg]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn invalid_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "preset": { "name": "geom", "params": { "r": 0.5, "s": 0.3 } }, "n_list": [] }"#,
    );
    let run = tdet(&["sweep", "--config", &cfg]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn unknown_criterion_id_is_a_usage_error() {
    let run = tdet(&["check", "--only", "99"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn check_runs_a_single_criterion() {
    let run = tdet(&["check", "--only", "2"]);
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("criterion 02"));
    assert!(stdout.contains("PASS"));
    assert!(stdout.contains("1 of 1 criteria passed"));
}

#[test]
fn presets_catalog_prints_every_family() {
    let run = tdet(&["presets"]);
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    for name in ["geom", "exp2", "cbeta", "monomial"] {
        assert!(stdout.contains(name), "catalog mentions {name}");
    }
}
