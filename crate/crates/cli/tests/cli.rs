//! End-to-end runs of the `oufield` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn oufield(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oufield"))
        .args(args)
        .env("OUFIELD_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(name)).expect("report written");
    serde_json::from_str(&text).expect("valid json")
}

#[test]
fn box_integral_equals_the_bracket() {
    let dir = TempDir::new().unwrap();
    let o = oufield(
        dir.path(),
        &[
            "integrate",
            "--kind",
            "box",
            "--g",
            "one",
            "--f",
            "product",
            "--upper",
            "2,3",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "integrate-box.json");
    let v = r["result"]["value"].as_f64().unwrap();
    assert!((v - 6.0).abs() < 1e-12, "{v}");
    assert_eq!(r["pass"], true);
}

#[test]
fn triangle_with_apex_on_the_antidiagonal_vanishes() {
    let dir = TempDir::new().unwrap();
    let o = oufield(
        dir.path(),
        &[
            "integrate",
            "--kind",
            "triangle",
            "--g",
            "mix",
            "--f",
            "exp",
            "--apex",
            "1,-1",
        ],
    );
    assert_eq!(code(&o), 0);
    let v = report(dir.path(), "integrate-triangle.json")["result"]["value"]
        .as_f64()
        .unwrap();
    assert!(v.abs() < 1e-12, "{v}");
}

#[test]
fn additivity_check_passes() {
    let dir = TempDir::new().unwrap();
    let o = oufield(
        dir.path(),
        &[
            "integrate",
            "--kind",
            "additivity",
            "--g",
            "sin",
            "--f",
            "mix",
            "--apex",
            "0.8,0.6",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report(dir.path(), "integrate-additivity.json")["pass"], true);
}

#[test]
fn simulate_is_reproducible_from_the_seed() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["simulate", "--replications", "5", "--seed", "11", "--cells", "6"];
    assert_eq!(code(&oufield(a.path(), &args)), 0);
    assert_eq!(code(&oufield(b.path(), &args)), 0);
    for k in 0..5 {
        let name = format!("ensemble/rep_{k:05}.csv");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let c = TempDir::new().unwrap();
    assert_eq!(
        code(&oufield(
            c.path(),
            &["simulate", "--replications", "5", "--seed", "12", "--cells", "6"]
        )),
        0
    );
    let x = std::fs::read(a.path().join("ensemble/rep_00000.csv")).unwrap();
    let z = std::fs::read(c.path().join("ensemble/rep_00000.csv")).unwrap();
    assert_ne!(x, z);
}

#[test]
fn simulate_with_a_fractional_driver() {
    let dir = TempDir::new().unwrap();
    let o = oufield(
        dir.path(),
        &[
            "simulate",
            "--driver",
            "fbm",
            "--hurst",
            "0.7,0.3",
            "--truncation",
            "4",
            "--replications",
            "3",
            "--transform",
            "lamperti",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "simulate.json");
    assert_eq!(r["driver"], "fbm");
    assert_eq!(r["parameters"]["hurst"][0], 0.7);
    assert!(dir.path().join("ensemble/manifest.json").exists());
}

#[test]
fn saved_field_can_be_integrated() {
    let dir = TempDir::new().unwrap();
    let args = ["simulate", "--replications", "1", "--transform", "none", "--cells", "4"];
    assert_eq!(code(&oufield(dir.path(), &args)), 0);
    let field = dir.path().join("ensemble/rep_00000");
    let o = oufield(dir.path(), &["integrate", "--field", field.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# box run\nkind = box\ng = one\nf = product\nupper = 2, 2\n").unwrap();
    let out = dir.path().join("out");
    let c = cfg.to_str().unwrap();
    let o = oufield(
        dir.path(),
        &[
            "integrate",
            "--config",
            c,
            "--out",
            out.to_str().unwrap(),
            "--upper",
            "3,3",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = report(&out, "integrate-box.json")["result"]["value"].as_f64().unwrap();
    assert!((v - 9.0).abs() < 1e-12, "{v}");
    assert!(!dir.path().join("integrate-box.json").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        code(&oufield(dir.path(), &["report", "--config", cfg.to_str().unwrap()])),
        2
    );
    assert_eq!(code(&oufield(dir.path(), &["integrate", "--kind", "sphere"])), 2);
    assert_eq!(code(&oufield(dir.path(), &["integrate", "--g", "tan"])), 2);
    assert_eq!(code(&oufield(dir.path(), &["simulate", "--theta", "-1,1"])), 2);
    assert_eq!(
        code(&oufield(dir.path(), &["verify", "--suite", "langevin", "--dim", "3"])),
        2
    );
    assert_eq!(code(&oufield(dir.path(), &["report"])), 2);
}

#[test]
fn identity_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = oufield(dir.path(), &["verify", "--suite", "identities"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report(dir.path(), "verify-identities.json")["pass"], true);
}

#[test]
fn stationarity_separates_ou_from_the_sheet() {
    let dir = TempDir::new().unwrap();
    let ou = oufield(
        dir.path(),
        &["verify", "--suite", "stationarity", "--replications", "300"],
    );
    assert_eq!(code(&ou), 0, "{}", String::from_utf8_lossy(&ou.stdout));
    let other = TempDir::new().unwrap();
    let sheet = oufield(
        other.path(),
        &[
            "verify",
            "--suite",
            "stationarity",
            "--source",
            "bsheet",
            "--replications",
            "300",
        ],
    );
    assert_eq!(code(&sheet), 1);
    assert_eq!(report(other.path(), "verify-stationarity.json")["pass"], false);
}

#[test]
fn report_summarizes_the_run() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&oufield(dir.path(), &["integrate"])), 0);
    assert_eq!(code(&oufield(dir.path(), &["verify", "--suite", "round-trips"])), 0);
    let o = oufield(dir.path(), &["report"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("integrate-box.json"));
    assert!(text.contains("verify-round-trips.json"));
    assert!(text.contains("2 of 2 reports pass"), "{text}");
}
