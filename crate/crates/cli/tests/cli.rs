use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wach"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

const TRIVIAL: &str = r#"{"schema": 1, "p": 5, "precision": {"padic": 3, "pi": 12},
  "module": {"rank": 1, "weights": [0], "matrix": [["1"]]}}"#;

#[test]
fn verify_sample_config_passes() {
    let cfg = sample("p5_rank2.json");
    let out = wach(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let body = String::from_utf8(out.stdout).unwrap();
    assert!(body.contains("\"status\": \"pass\""), "{body}");
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sample("p3_rank1.json");
    let mut bodies = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.json"));
        let out = wach(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        bodies.push(fs::read(&path).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn text_format_lists_checks() {
    let cfg = sample("p3_rank1.json");
    let out = wach(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "text",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] heights"), "{text}");
    assert!(text.contains("summary: pass"));
}

#[test]
fn build_emits_generators_without_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, TRIVIAL).unwrap();
    let out = wach(&["build", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"generators\""));
    assert!(text.contains("\"checks\": []"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\"schema\": 1,\n \"p\": 4}").unwrap();
    let out = wach(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn invalid_prime_is_rejected_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, TRIVIAL.replace("\"p\": 5", "\"p\": 9")).unwrap();
    let out = wach(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`p`"));
}

#[test]
fn missing_config_file_exits_2() {
    let out = wach(&["build", "--config", "/nonexistent/wach.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = wach(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn refused_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let text = TRIVIAL.replace(
        r#"[["1"]]}"#,
        r#"[["1"]]}, "checks": [{"congruence": {"partner": [["6"]], "n": 0}}]"#,
    );
    fs::write(&cfg, text).unwrap();
    let out = wach(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"refused\""));
}

#[test]
fn selftest_runs_and_guards_prime() {
    let out = wach(&["selftest", "--prime", "5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let out = wach(&["selftest", "--prime", "17"]);
    assert_eq!(out.status.code(), Some(1));
    let out = wach(&["selftest", "--prime", "6"]);
    assert_eq!(out.status.code(), Some(1));
}
