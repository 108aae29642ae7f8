use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn specvar(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specvar"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn example_table_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = specvar(dir.path(), &["example", "--format", "structured-text"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    assert!((v["d2_numeric"].as_f64().unwrap() - 0.1).abs() < 1e-10);
}

#[test]
fn example_rejects_large_t() {
    let dir = tempfile::tempdir().unwrap();
    let o = specvar(dir.path(), &["example", "--t", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn match_two_spectra() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.json"), "[[1, 0], [2, 0]]").unwrap();
    fs::write(dir.path().join("b.json"), "[[2.5, 0], [1.1, 0]]").unwrap();
    let o = specvar(dir.path(), &["match", "--a", "a.json", "--b", "b.json", "--format", "structured-text"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["d2"].as_f64().unwrap() - 0.26f64.sqrt()).abs() < 1e-15);
}

#[test]
fn s_number_and_delta() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("j.json"),
        r#"{"n_rows": 2, "n_cols": 2, "entries": [[0, 0], [1, 0], [0, 0], [0, 0]]}"#,
    )
    .unwrap();
    let o = specvar(dir.path(), &["s-number", "--matrix", "j.json", "--seed", "3", "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("s = 1\n"));
    let o = specvar(dir.path(), &["delta", "--matrix", "j.json", "--format", "structured-text"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["delta"].as_f64(), Some(1.0));
    assert_eq!(v["strictly_upper_norm"].as_f64(), Some(1.0));
}

#[test]
fn nan_matrix_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("m.json"),
        r#"{"n_rows": 1, "n_cols": 1, "entries": [[NaN, 0]]}"#,
    )
    .unwrap();
    let o = specvar(dir.path(), &["delta", "--matrix", "m.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("entries[0][0]"));
}

#[test]
fn bound_on_one_instance() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("spec.json"),
        r#"{"blocks": [{"lambda": [1, 0], "size": 2}, {"lambda": [-1, 0.5], "size": 1}],
            "q": {"random_seed": 1, "target_kappa": 10}}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("e.json"),
        r#"{"n_rows": 3, "n_cols": 3, "entries": [[0.01, 0], [0, 0.02], [0, 0], [0, 0], [-0.01, 0], [0.03, 0], [0.02, 0], [0, 0], [0, -0.01]]}"#,
    )
    .unwrap();
    let o = specvar(
        dir.path(),
        &["bound", "--spec", "spec.json", "--perturbation", "e.json", "--format", "structured-text"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bounds"].as_array().unwrap().len(), 17);
    assert!(v["slacks"].as_array().unwrap().iter().all(|s| s["violated"] == false));
    let o = specvar(dir.path(), &["bound", "--spec", "spec.json", "--perturbation", "e.json", "--format", "csv"]);
    assert!(stdout(&o).starts_with("trial,bound_id,branch,value,d2,slack\n"));
}

fn without_stamp(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("# generated_at=")).collect::<Vec<_>>().join("\n")
}

#[test]
fn sweep_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "sweep", "--trials", "40", "--n-max", "7", "--seed", "11", "--kappa", "1,10",
            "--perturbation", "gaussian:0.2,rank1:1.5,scalar:0.05", "--out", out,
        ]
    };
    let a = specvar(dir.path(), &args("a.csv"));
    let b = specvar(dir.path(), &args("b.csv"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert!(a.starts_with("# generated_at="));
    assert_eq!(without_stamp(&a), without_stamp(&b));
    assert_eq!(a.lines().nth(1), Some("trial,bound_id,branch,value,d2,slack"));
}

#[test]
fn sweep_structured_text_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"seed": 2, "trials": 6, "n_range": [2, 5], "block_profile": {"kind": "single-jordan"},
            "perturbations": [{"kind": "zero"}], "kappas": [3], "s_mode": "computed"}"#,
    )
    .unwrap();
    let o = specvar(dir.path(), &["sweep", "--config", "cfg.json", "--format", "structured-text", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 6);
    assert_eq!(v["summary"]["violations"], 0);
}

#[test]
fn sweep_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = specvar(dir.path(), &["sweep", "--profile", "single-jordan", "--n-min", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = specvar(dir.path(), &["sweep", "--perturbation", "gaussian:0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = specvar(dir.path(), &["sweep", "--perturbation", "cauchy:1"]);
    assert_eq!(o.status.code(), Some(2));
}
