use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singularcs"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"generated_at\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn simulate_twice_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = run(d, &["simulate", "--seed", "42"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["trajectory.csv", "series.csv"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    assert_eq!(
        without_timestamp(&read(a.join("simulate.json"))),
        without_timestamp(&read(b.join("simulate.json")))
    );
    let report: serde_json::Value = serde_json::from_str(&read(a.join("simulate.json"))).unwrap();
    assert_eq!(report["schema_version"], "1.0");
    assert_eq!(report["status"], "ok");
    assert_eq!(report["config"]["initial"]["seed"], 42);
}

#[test]
fn seed_changes_the_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&a, &["simulate", "--seed", "1"]).status.success());
    assert!(run(&b, &["simulate", "--seed", "2"]).status.success());
    assert_ne!(read(a.join("trajectory.csv")), read(b.join("trajectory.csv")));
}

#[test]
fn dbl_of_a_measure_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "weight,p1,p2\n0.25,0.0,1.0\n0.75,-0.5,2.0\n").unwrap();
    let o = run(dir.path(), &["dbl", m.to_str().unwrap(), m.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "0.0");
}

#[test]
fn dbl_between_separated_diracs_saturates() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    std::fs::write(&a, "weight,p1\n0.5,0.0\n0.5,1.0\n").unwrap();
    std::fs::write(&b, "weight,p1\n1.0,3.0\n").unwrap();
    let o = run(dir.path(), &["dbl", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success());
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((v - 2.0).abs() < 1e-12);
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("dbl.json"))).unwrap();
    assert_eq!(report["result"]["value"], 2.0);
}

#[test]
fn missing_input_reports_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["diagnose", "does-not-exist.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let line = String::from_utf8_lossy(&o.stderr);
    let doc: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(doc["status"], "error");
    assert_eq!(doc["error"]["kind"], "InvalidConfig");
    assert!(dir.path().join("error.json").is_file());
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"dbl": {"method": "dense", "bogus": 1}}"#).unwrap();
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "weight,p1\n1.0,0.0\n").unwrap();
    let o = run(
        dir.path(),
        &["dbl", m.to_str().unwrap(), m.to_str().unwrap(), "--config", cfg.to_str().unwrap()],
    );
    assert!(!o.status.success());
}

#[test]
fn diagnose_and_residual_read_simulate_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["simulate"]).status.success());
    let traj = dir.path().join("trajectory.csv");
    let d = dir.path().join("diag");
    let o = run(&d, &["diagnose", traj.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = dir.path().join("res");
    let o = run(&r, &["residual", traj.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(r.join("residual.json"))).unwrap();
    assert!(report["result"]["kinetic"].is_object());
    assert!(report["result"]["fields"].is_object());
}

#[test]
fn pairstudy_writes_one_row_per_eps() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["pairstudy"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(dir.path().join("pairs.csv")).lines().count(), 5);
}

#[test]
fn schema_names_every_command() {
    let o = Command::new(env!("CARGO_BIN_EXE_singularcs")).arg("schema").output().unwrap();
    assert!(o.status.success());
    let schema: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for cmd in ["simulate", "dbl", "diagnose", "residual", "mfstudy", "pairstudy"] {
        assert!(schema["$defs"][cmd].is_object(), "{cmd}");
    }
}
