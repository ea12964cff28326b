use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ghzdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghzdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = ghzdyn(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn close(v: &Value, want: f64, tol: f64) -> bool {
    (v.as_f64().expect("number") - want).abs() < tol
}

#[test]
fn compute_ghz_golden() {
    let v = json_out(&["compute", "--state", "ghz"]);
    assert!(close(&v["report"]["tau3"], 1.0, 1e-9));
    assert!(close(&v["report"]["c3_pure"], 0.5f64.sqrt(), 1e-9));
    let cuts = v["report"]["cuts"].as_array().unwrap();
    assert_eq!(cuts.len(), 3);
    assert!(cuts.iter().all(|c| c["terms"].as_array().unwrap().len() == 6));
}

#[test]
fn compute_single_bitflip() {
    let v = json_out(&["compute", "--state", "ghz", "--channel", "bitflip:q3:p=0.25"]);
    assert!(close(&v["report"]["tau3"], 0.70711, 1e-5));
    assert!(v["analytic"]["residuals"]["tau3"].as_f64().unwrap() < 1e-8);
}

#[test]
fn compute_two_sided_factor_law() {
    let v = json_out(&[
        "compute", "--state", "ghz", "--channel", "bitflip:q2:p=0.2", "--channel", "bitflip:q3:p=0.1",
    ]);
    assert!(v["analytic"]["residuals"]["factor_tau3_sq"].as_f64().unwrap() < 1e-8);
}

#[test]
fn compute_lu_image_has_no_closed_form() {
    let v = json_out(&["compute", "--state", "ghz-lu:seed=3"]);
    assert!(close(&v["report"]["tau3"], 1.0, 1e-9));
    assert!(v.get("analytic").is_none());
}

#[test]
fn compute_from_amplitude_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.txt");
    let h = 0.5f64.sqrt();
    let lines: Vec<String> = (0..8)
        .map(|i| if i == 0 || i == 7 { format!("{h} 0") } else { "0 0".into() })
        .collect();
    std::fs::write(&path, lines.join("\n")).unwrap();
    let spec = format!("file:{}", path.display());
    let v = json_out(&["compute", "--state", &spec]);
    assert!(close(&v["report"]["tau3"], 1.0, 1e-9));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["compute", "--state", "nope"][..],
        &["compute", "--channel", "bitflip:q4:p=0.1"],
        &["compute", "--channel", "bitflip:q3:p=0.1", "--channel", "phaseflip:q3:p=0.1"],
        &["verify", "no-such-campaign"],
        &["sweep", "--points", "1"],
        &["sweep", "--sides", "4"],
        &["frobnicate"],
    ] {
        let out = ghzdyn(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn verify_pass_exits_0() {
    let out = ghzdyn(&["verify", "analytic-1sided", "--samples", "1000", "--seed", "42", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["campaign"], "analytic-1sided");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["samples"], 1000);
    assert_eq!(v["pass"], true);
    assert_eq!(v["variant_flags"]["two_sided"], "squared");
    assert!(v["environment"]["version"].is_string());
}

#[test]
fn cubed_variant_fails_exit_1() {
    let out = ghzdyn(&["verify", "two-sided", "--eq15-variant", "cubed", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["variant_flags"]["two_sided"], "cubed");
    assert_eq!(v["details"]["better_variant"], "squared");
}

#[test]
fn sweep_writes_101_rows_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = ghzdyn(&[
        "sweep", "--sides", "1", "--family", "bitflip", "--points", "101", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    assert_eq!(rdr.records().count(), 101);
    // no temp files left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn sweep_and_verify_are_deterministic() {
    let a = ghzdyn(&["sweep", "--sides", "2", "--points", "5", "--family", "bitflip", "--family", "bitphaseflip"]);
    let b = ghzdyn(&["sweep", "--sides", "2", "--points", "5", "--family", "bitflip", "--family", "bitphaseflip"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let a = ghzdyn(&["verify", "evolution", "--samples", "20", "--seed", "9"]);
    let b = ghzdyn(&["verify", "evolution", "--samples", "20", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn stamp_time_adds_timestamp() {
    let v = json_out(&["verify", "never-vanish", "--samples", "11", "--stamp-time"]);
    assert!(v["environment"]["timestamp"].is_string());
    let v = json_out(&["verify", "never-vanish", "--samples", "11"]);
    assert!(v["environment"]["timestamp"].is_null());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ghzdyn.conf");
    let out_dir = dir.path().join("results");
    std::fs::write(
        &cfg,
        format!("# test config\nseed = 5\nout_dir = {}\ntol.analytic-1sided = 0\n", out_dir.display()),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    // tolerance 0 from the config fails; the flag restores a passing tolerance
    let out = ghzdyn(&["--config", cfg, "verify", "analytic-1sided", "--samples", "5", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["tolerance"], 0.0);

    let out = ghzdyn(&[
        "--config", cfg, "verify", "analytic-1sided", "--samples", "5", "--seed", "8", "--tol", "1e-8",
        "--out", "r.json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 8);
}

#[test]
fn bad_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    let out = ghzdyn(&["--config", cfg.to_str().unwrap(), "compute"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = ghzdyn(&["--config", "/nonexistent/x.conf", "compute"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn roof_of_pure_ghz() {
    let v = json_out(&["roof", "--state", "ghz", "--restarts", "2"]);
    assert!(close(&v["roof"], 0.5f64.sqrt(), 1e-9));
    assert!(close(&v["deviation"], 0.0, 1e-9));
    assert_eq!(v["rank"], 1);
    assert!(v["reconstruction_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn help_on_every_subcommand() {
    for sub in ["compute", "sweep", "verify", "roof"] {
        let out = ghzdyn(&[sub, "--help"]);
        assert!(out.status.success(), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_ghzdyn")).exists());
}
