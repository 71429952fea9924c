//! End-to-end runs of the `cutq` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn cutq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutq")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cutq-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn two_cliques_have_two_components() {
    let out = cutq(&["--seed", "7", "components", "--family", "two_cliques", "--n", "64"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["components"].as_array().unwrap().len(), 2);
    assert_eq!(v["correct"], true);
    assert_eq!(v["ledger_verified"], true);
    assert!(v["queries"]["cut"].as_u64().unwrap() > 0);
}

#[test]
fn adversary_writes_an_indistinguishable_pair() {
    let dir = scratch("adversary");
    let out = cutq(&["--out", dir.to_str().unwrap(), "adversary", "--n", "4", "--queries", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let answers = v["query_answers"].as_array().unwrap();
    assert_eq!(answers.len(), 1);
    assert_eq!(answers[0][0], answers[0][1]);
    assert_ne!(v["totals"][0], v["totals"][1]);
    assert_eq!(v["certificate_bound_holds"], true);
    for file in ["g1.txt", "g2.txt", "certificate.json"] {
        assert!(dir.join(file).exists(), "{file} missing");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scale_csv_has_the_fixed_header() {
    let out = cutq(&[
        "--profile", "desk", "--format", "csv", "scale", "--algo", "components", "--family", "path", "--n", "8,16",
        "--trials", "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), cutquery::experiment::CSV_HEADER);
    assert_eq!(lines.count(), 4);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cutq(&["scale", "--algo", "nonsense"]).status.code(), Some(1));
    assert_eq!(cutq(&["components", "--family", "no_such_family"]).status.code(), Some(1));
    assert_eq!(cutq(&["--bogus-flag"]).status.code(), Some(1));
    assert_eq!(cutq(&["--help"]).status.code(), Some(0));
}

#[test]
fn broken_sparsity_promise_exits_two() {
    let out = cutq(&["learn", "--method", "split", "--max-degree", "1", "--family", "complete", "--n", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert!(v["failure"].is_string());
    assert!(v["queries"]["cut"].as_u64().unwrap() > 0);
}

#[test]
fn runs_are_reproducible() {
    let args = ["--seed", "3", "--profile", "desk", "forest", "--family", "erdos_renyi", "--n", "24"];
    let (a, b) = (cutq(&args), cutq(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let gen = ["--seed", "11", "gen", "--family", "d_regular", "--n", "20", "--d", "3"];
    assert_eq!(cutq(&gen).stdout, cutq(&gen).stdout);
}
