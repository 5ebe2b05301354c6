use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nv-lab"))
        .args(args)
        .env("NV_LAB_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const ZERO_SIM: &str = r#"{"schema_version":1,
  "simulation":{"grid":{"nx":16,"ny":16},"t_end":0.01,"dt":0.001,"scheme":"etdrk4"},
  "datum":{"kind":"zero"}}"#;

const MEAN_SIM: &str = r#"{"schema_version":1,
  "simulation":{"grid":{"nx":16,"ny":16},"t_end":0.01,"dt":0.001,"scheme":"etdrk4"},
  "datum":{"kind":"modes","modes":[{"xi":0,"eta":0,"re":1.0,"im":0.0},{"xi":1,"eta":2,"re":0.01,"im":0.0}],"real":true}}"#;

#[test]
fn count_hyperbola_prints_hand_count() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["count", "hyperbola", "1", "0", "1", "--square", "0", "0", "21"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn manifest_lists_every_output() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["count", "cubic", "0", "0", "--square", "0", "0", "21"]);
    assert_eq!(stdout(&o).trim(), "21");
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("count-cubic-manifest.json")).unwrap()).unwrap();
    assert_eq!(m["exit_code"], 0);
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for f in outputs {
        assert!(dir.path().join(f.as_str().unwrap()).exists(), "{f} missing");
    }
}

#[test]
fn malformed_config_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", "{ not json");
    let o = run(dir.path(), &["--config", &cfg, "simulate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "extra.json", r#"{"schema_version":1,"bogus":true}"#);
    let o = run(dir.path(), &["--config", &cfg, "simulate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn nonzero_mean_rejected_unless_projected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "mean.json", MEAN_SIM);
    assert_eq!(run(dir.path(), &["--config", &cfg, "simulate"]).status.code(), Some(1));
    let o = run(dir.path(), &["--config", &cfg, "simulate", "--project-mean"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn zero_datum_stays_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "zero.json", ZERO_SIM);
    let o = run(dir.path(), &["--config", &cfg, "simulate"]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("simulate-diagnostics.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        for col in 3..10 {
            assert_eq!(r[col].parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn reproducible_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = write_config(&a, "zero.json", ZERO_SIM);
    for d in [&a, &b] {
        let o = run(d.path(), &["--config", &cfg, "--reproducible", "simulate"]);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["simulate-diagnostics.csv", "simulate-summary.json", "simulate-manifest.json", "simulate-snapshot-00000.nvf1"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn constant_free_bound_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "bounds", "--constant-free", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("(1, 0)"));
}

#[test]
fn analytic_bound_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "bounds", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn kform_report_names_coefficient() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "kform"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3/4"));
}

#[test]
fn scaling_with_unit_lambda_is_exact() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["scaling-check", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("d = 0e0"), "{}", stdout(&o));
}

#[test]
fn line_probe_without_q_grows_like_sqrt_r() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["probe", "--family", "counterexample-line", "--no-q", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("probe-report.json")).unwrap()).unwrap();
    let slope = report["fitted_slope"].as_f64().unwrap();
    assert!((0.45..=0.55).contains(&slope), "{slope}");
}

#[test]
fn count_rejects_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "zero.json", ZERO_SIM);
    let o = run(dir.path(), &["--config", &cfg, "count", "sigma3", "0", "0", "--square", "0", "0", "11"]);
    assert_eq!(o.status.code(), Some(1));
}
