use hochcyc_cli::{run, Cli, RunConfig};
use clap::Parser;
use std::path::PathBuf;
use std::process::Command;

fn cfg(args: &[&str]) -> RunConfig {
    let mut full = vec!["hochcyc"];
    full.extend_from_slice(args);
    RunConfig::from(Cli::try_parse_from(full).unwrap())
}

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hochcyc")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hochcyc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn without_timings(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn homology_with_oracle_matches() {
    let r = run(&cfg(&["homology", "dual_numbers", "--variant", "hochschild", "--weight", "5", "--oracle"])).unwrap();
    assert!(r.passed, "{}", r.summary());
    assert_eq!(r.betti.len(), 2);
    assert_eq!(r.betti[0].source, "engine");
    assert_eq!(r.betti[1].source, "oracle");
    assert_eq!(r.betti[0].betti, r.betti[1].betti);
    assert_eq!(r.betti[0].ranks, r.betti[1].ranks);
}

#[test]
fn verify_theorems_on_toy() {
    let r = run(&cfg(&["verify-theorems", "toy_zero_energy", "--families", "5"])).unwrap();
    assert!(r.passed, "{}", r.summary());
    assert!(r.checks.iter().any(|c| c.name == "chain map connes"));
    assert!(r.checks.iter().all(|c| c.witnesses.is_empty()));
}

#[test]
fn expand_structure_lists_the_sphere_term() {
    let r = run(&cfg(&["expand-structure", "--k", "0", "--l", "1"])).unwrap();
    assert!(r.passed);
    let json = r.to_json();
    assert!(json.contains("\"kind\": \"sphere\""), "{json}");
    assert_eq!(r.terms.len(), 4);
}

#[test]
fn exit_codes() {
    let (code, out, _) = bin(&["check-ainfty", "dual_numbers", "--weight", "3"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("\"passed\": true"));
    let (code, _, _) = bin(&["axioms", "synthetic-corrupt"]);
    assert_eq!(code, 1);
    let (code, _, err) = bin(&["dsquare", "no_such_algebra"]);
    assert_eq!(code, 2);
    assert!(err.contains("no such file or builtin"), "{err}");
    let (code, _, _) = bin(&["homology", "dual_numbers", "--window", "3:1"]);
    assert_eq!(code, 2);
    let (code, _, _) = bin(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn reports_are_deterministic() {
    let args = ["t-lemma", "exterior(2)", "--trials", "50", "--seed", "7"];
    let (_, a, _) = bin(&args);
    let (_, b, _) = bin(&args);
    assert_eq!(without_timings(&a), without_timings(&b));
    let (_, c, _) = bin(&["t-lemma", "exterior(2)", "--trials", "50", "--seed", "7", "--weight", "3"]);
    assert_ne!(without_timings(&a), without_timings(&c));
    let v = without_timings(&a);
    for key in ["command", "engine_version", "cap", "seed", "checks", "passed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn instance_files_and_output() {
    let inst = hochcyc::format::load("curved_matrix").unwrap();
    let path = scratch("curved_matrix.txt");
    std::fs::write(&path, hochcyc::format::write_instance(&inst)).unwrap();
    let out = scratch("report.json");
    let (code, summary, _) = bin(&["dsquare", path.to_str().unwrap(), "--weight", "3", "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{summary}");
    assert!(summary.lines().all(|l| l.starts_with("PASS")), "{summary}");
    assert!(summary.contains("control: d^2(1) = -mu0 ⊗ mu0"));
    let json = std::fs::read_to_string(&out).unwrap();
    assert!(json.contains("\"command\": \"dsquare\""));

    let bad = scratch("bad.txt");
    std::fs::write(&bad, "BASIS 1 e\nDEGREES 0 0\nMU 2\n  1 1 -> (1) f\n").unwrap();
    let (code, _, err) = bin(&["check-ainfty", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4, column 14"), "{err}");
}

#[test]
fn sign_lemmas_and_axioms() {
    let r = run(&cfg(&["sign-lemmas", "--rotation-k", "4", "--splitting-k", "5", "--trials", "100"])).unwrap();
    assert!(r.passed, "{}", r.summary());
    let r = run(&cfg(&["axioms", "synthetic"])).unwrap();
    assert!(r.passed, "{}", r.summary());
    let r = run(&cfg(&["axioms", "synthetic-corrupt"])).unwrap();
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(!failed.is_empty() && failed.iter().all(|n| n.starts_with("divisor")), "{failed:?}");
    assert!(run(&cfg(&["axioms", "dual_numbers"])).is_err());
}
