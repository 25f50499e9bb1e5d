use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refined-young"))
        .args(args)
        .output()
        .expect("run binary")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn file(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[test]
fn unknown_verb_is_a_usage_error() {
    let o = bin(&["frobnicate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn verify_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "r.json");
    let o = bin(&[
        "verify",
        "scalar",
        "--trials",
        "20000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["violations"], 0);
    let cfg = &doc["reports"][0]["config"];
    assert_eq!(cfg["seed"], 7);
    assert_eq!(cfg["tol_rel"], 1e-12);
    assert_eq!(cfg["spectrum_range"][1], 1e6);
}

#[test]
fn verify_all_covers_every_family() {
    let o = bin(&["verify", "--trials", "30", "--dims", "2,3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let families: Vec<_> = doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["config"]["family"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(families, ["scalar", "operator", "hs"]);
    assert_eq!(
        doc["reports"][1]["config"]["dims"],
        serde_json::json!([2, 3])
    );
}

#[test]
fn mutated_fuzz_exits_one_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "m.json");
    let o = bin(&[
        "fuzz",
        "--mutation",
        "strengthened-exponent",
        "--trials",
        "5000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["violations"].as_u64().unwrap() > 0);
    assert_eq!(
        doc["reports"][0]["config"]["mutation"],
        "strengthened-exponent"
    );
    assert!(stdout(&o).contains("mutation=strengthened-exponent"));
}

#[test]
fn mutation_from_another_family_is_rejected() {
    let o = bin(&[
        "fuzz",
        "scalar",
        "--mutation",
        "outer-ratio",
        "--trials",
        "10",
    ]);
    assert_eq!(code(&o), 2);
    let o = bin(&["fuzz", "--mutation", "nonsense"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_reproduces_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let good = path(dir.path(), "good.json");
    let bad = path(dir.path(), "bad.json");
    assert_eq!(
        code(&bin(&[
            "verify",
            "operator",
            "--trials",
            "40",
            "--out",
            good.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        code(&bin(&[
            "fuzz",
            "hs",
            "--mutation",
            "max-pair-kappa",
            "--trials",
            "200",
            "--out",
            bad.to_str().unwrap()
        ])),
        1
    );
    let o = bin(&["check", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("operator: recorded=pass rerun=pass match"));
    let o = bin(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("hs: recorded=fail rerun=fail match"));

    let text = std::fs::read_to_string(&good).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["reports"][0]["violations"] = 3.into();
    let tampered = path(dir.path(), "tampered.json");
    std::fs::write(&tampered, doc.to_string()).unwrap();
    let o = bin(&["check", tampered.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn check_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let p = file(dir.path(), "x.json", "{\"schema\": 1}");
    let o = bin(&["check", &p]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("x.json"));
}

#[test]
fn csv_has_fixed_columns() {
    let o = bin(&["verify", "hs", "--trials", "3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,theorem,branch,n,v,h,lhs,rhs,slack,seed,trial"
    );
    let first: Vec<_> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 11);
    assert_eq!(first[0], "hs");
}

#[test]
fn tightness_reports_margins() {
    let o = bin(&["tightness", "scalar", "--trials", "500"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["tightness"][0]["rows"].as_array().unwrap().len(), 2);
    let o = bin(&["tightness", "operator", "--trials", "9", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("family,check,evaluations"));
}

#[test]
fn eval_scalar_equality_case() {
    let o = bin(&["eval", "scalar", "--a", "1", "--b", "16", "--v", "0.25"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("refined_lower.lhs=4.75000\n"));
    assert!(s.contains("refined_lower.rhs=4.75000\n"));
    assert!(s.contains("refined_lower.slack=0.00000\n"));
}

#[test]
fn eval_endpoints_are_trivial_and_bad_weights_fail() {
    let o = bin(&["eval", "scalar", "--a", "3", "--b", "5", "--v", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("trivial=true"));
    assert_eq!(
        code(&bin(&[
            "eval", "scalar", "--a", "3", "--b", "5", "--v", "1.5"
        ])),
        2
    );
    assert_eq!(
        code(&bin(&[
            "eval", "scalar", "--a", "-3", "--b", "5", "--v", "0.5"
        ])),
        2
    );
}

#[test]
fn matrix_file_errors_name_path_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let a = file(dir.path(), "a.txt", "2\n1 0\n0 1\n");
    let broken = file(dir.path(), "broken.txt", "2\n4 0\n0 nine\n");
    let o = bin(&[
        "eval", "operator", "--a-file", &a, "--b-file", &broken, "--v", "0.3",
    ]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains(&format!("{broken}:3:")),
        "{}",
        stderr(&o)
    );

    let missing = dir.path().join("missing.txt").display().to_string();
    let o = bin(&[
        "eval", "operator", "--a-file", &a, "--b-file", &missing, "--v", "0.3",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(&missing));
}

#[test]
fn sandwich_override() {
    let dir = tempfile::tempdir().unwrap();
    let a = file(dir.path(), "a.txt", "2\n1 0\n0 2\n");
    let b = file(dir.path(), "b.txt", "2\n4 0\n0 9\n");
    let tight = bin(&[
        "eval", "operator", "--a-file", &a, "--b-file", &b, "--v", "0.3",
    ]);
    assert_eq!(code(&tight), 0);
    assert!(stdout(&tight).contains("h=2.00000\n"));
    let loose = bin(&[
        "eval",
        "operator",
        "--a-file",
        &a,
        "--b-file",
        &b,
        "--v",
        "0.3",
        "--sandwich",
        "0.5,3,3.5,10",
    ]);
    assert_eq!(code(&loose), 0, "{}", stderr(&loose));
    let s = stdout(&loose);
    assert!(s.contains("h_prime=20.00000\n") && s.contains("chain.all_hold=true"));
    let wrong = bin(&[
        "eval",
        "operator",
        "--a-file",
        &a,
        "--b-file",
        &b,
        "--v",
        "0.3",
        "--sandwich",
        "1,1.5,4,9",
    ]);
    assert_eq!(code(&wrong), 2);
}

#[test]
fn eval_hs_one_by_one() {
    let dir = tempfile::tempdir().unwrap();
    let one = file(dir.path(), "one.txt", "1\n1\n");
    let b = file(dir.path(), "b.txt", "1\n16\n");
    let o = bin(&[
        "eval", "hs", "--a-file", &one, "--b-file", &b, "--x-file", &one, "--v", "0.5",
    ]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("hs_refined_upper.lhs=72.25000\n"), "{s}");
    assert!(s.contains("hs_refined_upper.slack=0.00000\n"), "{s}");
}
