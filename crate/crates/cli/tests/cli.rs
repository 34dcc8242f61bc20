use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_supersim"));
    c.env_remove("SUPERSIM_MAX_DIM");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn validator() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(doc: &Value) {
    let v = validator();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{doc:#}");
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&doc);
    doc
}

fn error(out: &Output, code: i32) -> Value {
    assert_eq!(out.status.code(), Some(code), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let doc: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid(&doc);
    assert_eq!(doc["exit_code"], code);
    doc
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

struct States {
    _dir: tempfile::TempDir,
    u: PathBuf,
    v: PathBuf,
    qutrit: PathBuf,
}

fn states() -> States {
    let dir = tempfile::tempdir().unwrap();
    let u = write(dir.path(), "u.json", r#"{"dim":2,"kind":"vector","data":[[0.6,0.0],[0.0,0.8]]}"#);
    let v = write(dir.path(), "v.json", r#"{"dim":2,"kind":"density","data":[[0.64,0.0],[0.48,0.0],[0.48,0.0],[0.36,0.0]]}"#);
    let qutrit = write(dir.path(), "w.json", r#"{"dim":3,"kind":"vector","data":[[0.6,0.0],[0.0,0.0],[0.0,0.8]]}"#);
    States { _dir: dir, u, v, qutrit }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identities_report_three_passing_checks() {
    let doc = report(&run(&["identities", "--samples", "100", "--seed", "7"]));
    assert_eq!(doc["checks"].as_array().unwrap().len(), 3);
    assert_eq!(doc["pass"], true);
    for c in doc["results"]["identities"].as_array().unwrap() {
        assert!(c["max_error"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn probe_is_close_to_two() {
    let doc = report(&run(&["probe", "--eps", "1e-4"]));
    let value = doc["results"]["value"].as_f64().unwrap();
    assert!((1.99..=2.0).contains(&value), "{value}");
    assert_eq!(doc["pass"], true);
}

#[test]
fn probe_plot_export() {
    let dir = tempfile::tempdir().unwrap();
    report(&run(&["probe", "--eps", "0.5", "--plot-dir", s(dir.path())]));
    let text = std::fs::read_to_string(dir.path().join("probe.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn tomo_reports_are_byte_stable() {
    let st = states();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = run(&["tomo", "--state", s(&st.qutrit), "--shots", "10000", "--seed", "11", "--truth", s(&st.qutrit), "--out", s(out)]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let doc: Value = serde_json::from_slice(&ta).unwrap();
    assert_valid(&doc);
    assert_eq!(doc["results"]["settings"], 7);
    let other = run(&["tomo", "--state", s(&st.qutrit), "--shots", "10000", "--seed", "12", "--truth", s(&st.qutrit)]);
    assert_ne!(other.stdout, ta);
}

#[test]
fn exact_tomography_recovers_the_state() {
    let st = states();
    let doc = report(&run(&["tomo", "--state", s(&st.v), "--shots", "100", "--exact", "--truth", s(&st.v)]));
    assert!(doc["results"]["truth"]["trace_error"].as_f64().unwrap() < 1e-12);
    assert!(doc["results"]["truth"]["vec_error"].as_f64().unwrap() < 1e-12);
    let no_truth = report(&run(&["tomo", "--state", s(&st.v), "--shots", "100", "--exact"]));
    assert!(no_truth["results"]["truth"].is_null());
    assert!(no_truth["checks"].as_array().unwrap().is_empty());
}

#[test]
fn superpose_random_and_entangled() {
    let st = states();
    let args = ["superpose", "--u", s(&st.u), "--v", s(&st.v), "--alpha", "1", "--beta", "-0.5,0.2", "--eps", "0.25", "--seed", "3"];
    let doc = report(&run(&args));
    assert_eq!(doc["pass"], true);
    assert!(doc["results"]["budget"]["n"].as_u64().unwrap() >= 100);
    assert!(doc["results"]["outcome"]["trace"].as_f64().unwrap() >= doc["results"]["floor"].as_f64().unwrap());
    assert_eq!(run(&args).stdout, run(&args).stdout);

    let mut ent = args.to_vec();
    ent.extend(["--entangled", "--trials", "16"]);
    let doc = report(&run(&ent));
    let blocks = doc["results"]["entangled"]["blocks"].as_array().unwrap();
    let total: f64 = blocks.iter().map(|b| b["weight"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let exact = report(&run(&["superpose", "--u", s(&st.u), "--v", s(&st.v), "--alpha", "0.3,0.4", "--beta", "0.5", "--eps", "0.1", "--exact"]));
    assert!(exact["results"]["merit"].as_f64().unwrap() < 1e-9);
}

#[test]
fn audit_obstructs_and_exports_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let doc = report(&run(&["audit", "--candidate", "ideal", "--alpha", "1", "--beta", "1", "--samples", "64", "--plot-dir", s(dir.path())]));
    assert_eq!(doc["results"]["verdict"], "obstructed");
    assert_eq!(doc["results"]["winding_phase_loop"], 2);
    assert_eq!(doc["results"]["winding_constant"], 0);
    for name in ["phase_loop_error.csv", "sweep_loop_error.csv", "ghat_turns.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("t,value\n"));
        assert_eq!(text.lines().count(), 65, "{name}");
    }
    let turns = std::fs::read_to_string(dir.path().join("ghat_turns.csv")).unwrap();
    let last: f64 = turns.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(last > 1.9 && last < 2.0, "{last}");
}

#[test]
fn audit_accepts_a_base_point_file() {
    let dir = tempfile::tempdir().unwrap();
    let x0 = write(dir.path(), "x0.json", r#"{"dim":2,"kind":"vector","data":[[0.6,0.0],[0.0,0.8]]}"#);
    let doc = report(&run(&["audit", "--candidate", "constant", "--alpha", "1", "--beta", "2", "--x0", s(&x0), "--samples", "64", "--dim", "3"]));
    assert_eq!(doc["results"]["verdict"], "obstructed");
    assert_eq!(doc["results"]["threshold"], 0.4);
}

#[test]
fn table1_meta_check() {
    let doc = report(&run(&["table1", "--runs", "4", "--samples", "64", "--seed", "1"]));
    assert_eq!(doc["results"]["antidiagonal"], true);
    assert_eq!(doc["pass"], true);
}

#[test]
fn validation_errors_exit_two() {
    let st = states();
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dim":2,"kind":"vector","data":[[0.6,0.0]]}"#);
    let garbage = write(dir.path(), "garbage.json", "not json");
    let unnormalized = write(dir.path(), "un.json", r#"{"dim":2,"kind":"vector","data":[[1.0,0.0],[1.0,0.0]]}"#);
    for path in [&bad, &garbage, &unnormalized, &dir.path().join("missing.json")] {
        let doc = error(&run(&["tomo", "--state", s(path), "--shots", "100"]), 2);
        assert_eq!(doc["error"]["kind"], "validation");
    }
    error(&run(&["tomo", "--state", s(&st.u), "--shots", "10"]), 2);
    error(&run(&["tomo", "--state", s(&st.u), "--shots", "100", "--bogus"]), 2);
    error(&run(&["probe", "--eps", "1.5"]), 2);
    error(&run(&["audit", "--candidate", "magic", "--alpha", "1", "--beta", "1"]), 2);
    error(&run(&["superpose", "--u", s(&st.u), "--v", s(&st.qutrit), "--alpha", "1", "--beta", "1", "--eps", "0.2"]), 2);
    error(&run(&["superpose", "--u", s(&st.u), "--v", s(&st.v), "--alpha", "0", "--beta", "1", "--eps", "0.2"]), 2);
    error(&run(&["superpose", "--u", s(&st.u), "--v", s(&st.v), "--alpha", "1,x", "--beta", "1", "--eps", "0.2"]), 2);
    error(&run(&[]), 2);
    let o = bin().env("SUPERSIM_MAX_DIM", "lots").args(["probe", "--eps", "0.1"]).output().unwrap();
    error(&o, 2);
}

#[test]
fn runtime_errors_exit_one() {
    let st = states();
    // Nearly equal magnitudes push the copy budget past the shot table.
    let doc = error(&run(&["superpose", "--u", s(&st.u), "--v", s(&st.v), "--alpha", "1", "--beta", "1.0001", "--eps", "0.01"]), 1);
    assert_eq!(doc["error"]["kind"], "runtime");
    error(&run(&["probe", "--eps", "0.1", "--out", "/nonexistent/dir/report.json"]), 1);
}

#[test]
fn max_dim_override_is_accepted() {
    let o = bin().env("SUPERSIM_MAX_DIM", "64").args(["probe", "--eps", "0.1"]).output().unwrap();
    report(&o);
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    let mut doc = report(&run(&["probe", "--eps", "1e-3"]));
    assert!(v.is_valid(&doc));
    doc["results"]["value"] = Value::from(3.0);
    assert!(!v.is_valid(&doc));
    let mut doc = report(&run(&["audit", "--candidate", "mollified", "--alpha", "1", "--beta", "1", "--samples", "32"]));
    doc["results"]["verdict"] = Value::from("maybe");
    assert!(!v.is_valid(&doc));
    assert!(!v.is_valid(&serde_json::json!({ "error": { "kind": "oops", "message": "" }, "exit_code": 2 })));
}
