use std::path::Path;
use std::process::{Command, Output};

use jordantri::instance::canned_shift_pair;
use jordantri::{ComplexMatrix, InstanceFile};

fn jordantri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jordantri")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, inst: &InstanceFile) -> String {
    let p = dir.join(name);
    inst.save(&p).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gen_random_is_deterministic_and_loadable() {
    let a = jordantri(&["gen-random", "--seed", "1", "-n", "6", "-k", "3"]);
    let b = jordantri(&["gen-random", "--seed", "1", "-n", "6", "-k", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let inst = InstanceFile::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(inst.dim, 6);
    assert_eq!(inst.generators.len(), 3);
    assert_eq!(inst.metadata.seed, Some(1));
}

#[test]
fn triangularize_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&jordantri(&["gen-random", "--seed", "1", "-n", "6", "-k", "3", "--out", p])), 0);
    let o = jordantri(&["triangularize", p, "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "pass");
    assert!(v["result"]["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["result"]["chain_dims"], serde_json::json!([0, 1, 2, 3, 4, 5, 6]));
}

#[test]
fn check_traces_hypothesis_violation() {
    let dir = tempfile::tempdir().unwrap();
    let d = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
    let p = write(dir.path(), "d.json", &InstanceFile::from_generators(vec![d], "idempotent").unwrap());
    let o = jordantri(&["check-traces", &p, "--json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["status"], "hypothesis_violation");
}

#[test]
fn verify_all_canned_pair_passes() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "canned.json", &canned_shift_pair());
    let o = jordantri(&["verify-all", &p, "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    for (name, section) in v["result"].as_object().unwrap() {
        assert_eq!(section["status"], "pass", "{name}");
    }
    let again = jordantri(&["verify-all", &p, "--json"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn every_subcommand_runs_on_canned_pair() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "canned.json", &canned_shift_pair());
    for args in [
        vec!["close", &p, "--kind", "jordan"],
        vec!["close", &p, "--kind", "lie"],
        vec!["close", &p, "--kind", "assoc"],
        vec!["lie", &p],
        vec!["ideal", &p],
        vec!["check-traces", &p, "--ideal"],
        vec!["check-identities", &p],
        vec!["riesz", &p, "--index", "1"],
        vec!["adproj", &p, "--lambda", "0"],
        vec!["cartan", &p],
        vec!["reduce", &p],
    ] {
        let o = jordantri(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn assoc_closure_of_mixed_pair_is_full() {
    let dir = tempfile::tempdir().unwrap();
    let inst = InstanceFile::from_generators(vec![ComplexMatrix::unit(2, 0, 1), ComplexMatrix::unit(2, 1, 0)], "mixed").unwrap();
    let p = write(dir.path(), "m.json", &inst);
    let v = json(&jordantri(&["close", &p, "--kind", "assoc", "--json"]));
    assert_eq!(v["result"]["dim"], 4);
    let o = jordantri(&["reduce", &p, "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["result"]["reducible"], false);
    assert_eq!(code(&jordantri(&["triangularize", &p])), 2);
}

#[test]
fn io_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&jordantri(&["reduce", missing.to_str().unwrap()])), 4);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": 7}").unwrap();
    assert_eq!(code(&jordantri(&["reduce", bad.to_str().unwrap()])), 4);
    assert_eq!(code(&jordantri(&["frobnicate"])), 1);
    assert_eq!(code(&jordantri(&["gen-random", "-n", "1"])), 1);
    assert_eq!(code(&jordantri(&["gen-random", "-n", "3", "--tol-residual", "-1"])), 1);
}

#[test]
fn hard_flag_and_explicit_cond() {
    let a = jordantri(&["gen-random", "-n", "4", "--hard"]);
    let b = jordantri(&["gen-random", "-n", "4", "--cond", "10000"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, jordantri(&["gen-random", "-n", "4"]).stdout);
}
