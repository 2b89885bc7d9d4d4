use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strata-chern"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn chern_subcommand_reports_both_numbers() {
    let out = run(&["chern", "--mesh", "24x24"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["chern_fhs"], -1);
    assert_eq!(v["chern_analytic"], -1);
}

#[test]
fn trivial_phase() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"M": 2.5}, "mesh": {"nx": 24, "ny": 24}}"#,
    );
    let out = run(&["chern", "--config", cfg.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["chern_fhs"], 0);
}

#[test]
fn on_wall_config_exits_with_gapless_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"phi": 0.0, "M": 0.0}, "mesh": {"nx": 12, "ny": 12}}"#,
    );
    let out = run(&[
        "all",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("OnWall"));
}

#[test]
fn validation_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"mesh": {"nx": 2, "ny": 12}}"#);
    let out = run(&["chern", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mesh.nx"));

    let out = run(&["chern", "--mesh", "3x8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\"mesh\": ");
    let out = run(&["chern", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ParseError"));
}

#[test]
fn scatter_panel_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let read = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = run(&[
            "figure",
            "h",
            "--mesh",
            "12x12",
            "--seed",
            "42",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read(out_dir.join("panel_h.csv")).unwrap()
    };
    let (a, b) = (read("one"), read("two"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("FQ,FQS,k_x,k_y,theta\n"));
    assert_eq!(text.lines().count(), 10_001);
}

#[test]
fn csv_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "figure",
        "d",
        "--mesh",
        "12x12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("panel_d.csv")).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let v: f64 = cell.parse().unwrap();
            if cell.contains('e') {
                assert_eq!(strata_chern_cli::pipeline::fmt_float(v), cell);
            }
        }
    }
}

#[test]
fn inequalities_subcommand_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "inequalities",
        "--mesh",
        "16x16",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["inequality_violations"], 0);
    assert_eq!(v["seed"], 42);
}
