use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn data(name: &str) -> String {
    dir().join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abext")).args(args).env_remove("ABEXT_THREADS").output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn check_schema(name: &str, v: &Value) {
    let path = dir().join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn golden(name: &str, out: &[u8]) {
    let expected = std::fs::read(dir().join("tests/golden").join(name)).unwrap();
    assert_eq!(String::from_utf8_lossy(out), String::from_utf8_lossy(&expected), "{name}");
}

#[test]
fn count_quadratic() {
    let out = run(&["count", "--group", "2", "--counting", "conductor", "--bound", "13"]);
    assert!(out.status.success());
    golden("count_z2_13.json", &out.stdout);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["total"], 8);
    check_schema("count", &v);
}

#[test]
fn fairness_of_discriminant() {
    let out = run(&["fairness", "--group", "9", "--counting", "discriminant"]);
    golden("fairness_z9_disc.json", &out.stdout);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["fair"], false);
    assert_eq!(v["witness"], 9);
    check_schema("fairness", &v);
}

#[test]
fn enumerate_tsv_and_json() {
    let out = run(&["enumerate", "--group", "3", "--bound", "100"]);
    golden("enumerate_z3_100.tsv", &out.stdout);
    let v = ok_json(&["enumerate", "--group", "2,2", "--bound", "200", "--format", "json"]);
    check_schema("enumerate", &v);
}

#[test]
fn report_schemas() {
    let probs = ok_json(&["probs", "--group", "2", "--bound", "1e4", "--event", &data("split3.json"), "--given", &data("unram3.json")]);
    check_schema("probs", &probs);
    assert_eq!(probs["fair"], true);
    assert!((probs["target"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let cheb = ok_json(&["cheb", "--group", "4", "--prime", "5", "--bounds", "1e4,2e4"]);
    check_schema("cheb", &cheb);
    let indep = ok_json(&["indep", "--group", "4", "--spec1", &data("ram5.json"), "--spec2", &data("ram13.json"), "--bounds", "1e4,4e4"]);
    check_schema("indep", &indep);
    let ratio = ok_json(&["ratio", "--group", "3", "--spec1", &data("ram7.json"), "--spec2", &data("unram7.json"), "--bounds", "1e4,1e5"]);
    check_schema("ratio", &ratio);
    assert_eq!(ratio["target"]["exact"], "2/7");
    let constant = ok_json(&["constant", "--group", "2", "--truncation", "1e5"]);
    check_schema("constant", &constant);
    let via = ok_json(&["viability", "--group", "2", "--spec", &data("z2_ram3.json"), "--search-bound", "1e3"]);
    check_schema("viability", &via);
    assert_eq!(via["status"], "viable-with-witness");
    let at2 = ok_json(&["viability", "--group", "8", "--at-2", "--search-bound", "1e4"]);
    check_schema("viability", &at2);
    assert_eq!(at2["total"], 128);
    assert_eq!(at2["inviable"], 64);
}

#[test]
fn discprob_exit_codes() {
    let out = run(&["discprob", "--p", "3", "--q", "7", "--truncation", "1e5"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "inconclusive");
    check_schema("discprob", &v);
    let out = run(&["discprob", "--p", "3", "--q", "2", "--truncation", "1e5", "--tail", "progression"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "below 1/9");
    check_schema("discprob", &v);
}

#[test]
fn viability_exit_codes() {
    let out = run(&["viability", "--group", "8", "--spec", &data("z8_inert2.json"), "--search-bound", "1e4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["viability", "--group", "8", "--spec", &data("z8_inert2_full.json"), "--search-bound", "1e4", "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "inviable");
}

#[test]
fn errors_exit_one() {
    for args in [
        vec!["probs", "--group", "2", "--bound", "100", "--event", &data("dup.json")],
        vec!["probs", "--group", "2", "--bound", "100", "--event", &data("malformed.json")],
        vec!["constant", "--group", "9", "--counting", "discriminant"],
        vec!["count", "--group", "2", "--bound", "abc"],
        vec!["count", "--group", "1", "--bound", "10"],
        vec!["probs", "--group", "2", "--bound", "2", "--event", &data("split3.json")],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = run(&["probs", "--group", "2", "--bound", "100", "--event", &data("malformed.json")]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn output_independent_of_threads() {
    let cases: Vec<Vec<String>> = vec![
        vec!["enumerate", "--group", "4", "--bound", "3000"],
        vec!["count", "--group", "2,2", "--bound", "1e5"],
        vec!["cheb", "--group", "9", "--prime", "7", "--bounds", "1e4,4e4"],
        vec!["indep", "--group", "4", "--spec1", &data("ram5.json"), "--spec2", &data("ram13.json"), "--bounds", "1e4,4e4"],
        vec!["viability", "--group", "8", "--at-2", "--search-bound", "3e3"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in cases {
        let a: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let one = run(&[&["--threads", "1"], &a[..]].concat());
        let three = run(&[&["--threads", "3"], &a[..]].concat());
        assert!(one.status.success());
        assert_eq!(one.stdout, three.stdout, "{args:?}");
        assert_eq!(one.stdout, run(&a).stdout, "{args:?}");
    }
}

#[test]
fn schemas_are_valid_json_schema() {
    for entry in std::fs::read_dir(dir().join("schemas")).unwrap() {
        let path = entry.unwrap().path();
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(jsonschema::validator_for(&schema).is_ok(), "{}", Path::new(&path).display());
    }
}
