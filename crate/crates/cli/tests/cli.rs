use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn treesolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treesolve")).args(args).output().unwrap()
}

fn input(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const INTRO: &str = "~(ex y. x = f(y) & ~(ex z, w. x = f(z) & w = f(w)))\n";

#[test]
fn intro_formula_prints_true() {
    let file = input("intro.fol", INTRO);
    let out = treesolve(&["solve", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "true");
}

#[test]
fn open_formula_prints_its_solutions() {
    let file = input("open.fol", "ex y. x = f(y) & y = g(0)\n");
    let out = treesolve(&["solve", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "(ex u1, u2. x = f(u1) & u1 = g(u2) & u2 = 0)");
}

#[test]
fn winning_two_report_has_two_disjuncts() {
    let out = treesolve(&["bench", "winning", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["status"], "completed");
    assert_eq!(doc["answer"]["disjuncts"].as_array().unwrap().len(), 2);
    assert_eq!(doc["positions"], serde_json::json!([[1, 0], [3, 0]]));
}

#[test]
fn node_limit_exits_with_partial_stats() {
    let file = input("limit.fol", INTRO);
    let out = treesolve(&["solve", file.to_str().unwrap(), "--max-nodes", "3", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["status"], "node-limit");
    assert!(doc["answer"].is_null());
    assert!(doc["stats"]["steps"].as_u64().unwrap() > 0 || doc["stats"]["peak_nodes"].as_u64().unwrap() > 3);
}

#[test]
fn syntax_error_exits_with_one() {
    let file = input("broken.fol", "x = f(y\n");
    let out = treesolve(&["solve", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
}

#[test]
fn missing_file_exits_with_one() {
    let out = treesolve(&["solve", "/nonexistent/formula.fol"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn trace_goes_to_stderr_one_line_per_rule() {
    let file = input("trace.fol", INTRO);
    let out = treesolve(&["solve", file.to_str().unwrap(), "--trace", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let trace = String::from_utf8_lossy(&out.stderr);
    assert_eq!(trace.lines().count() as u64, doc["stats"]["steps"].as_u64().unwrap());
    assert!(trace.lines().all(|l| l.starts_with("step ") && l.contains(" rule ") && l.contains(" measure (")));
}

#[test]
fn checked_solve_agrees_with_plain_solve() {
    let file = input("checked.fol", "all x. ex y. x = f(y) | ~(ex z. x = f(z))\n");
    let plain = treesolve(&["solve", file.to_str().unwrap()]);
    let checked = treesolve(&["solve", file.to_str().unwrap(), "--check", "--stats"]);
    assert_eq!(checked.status.code(), Some(0));
    assert_eq!(stdout(&plain).trim(), "true");
    assert!(stdout(&checked).starts_with("true\nsteps "));
}

#[test]
fn oracle_decides_conjunctions() {
    let sat = input("sat.fol", "ex x, y. x = f(y) & finite(y)\n");
    let cyc = input("cyc.fol", "ex x. x = f(x) & finite(x)\n");
    let neg = input("neg.fol", "~(x = y)\n");
    assert_eq!(stdout(&treesolve(&["oracle", "sat", sat.to_str().unwrap()])).trim(), "sat");
    assert_eq!(stdout(&treesolve(&["oracle", "sat", cyc.to_str().unwrap()])).trim(), "unsat");
    assert_eq!(treesolve(&["oracle", "sat", neg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn oracle_lists_winning_positions() {
    let out = treesolve(&["oracle", "game", "2", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "(1, 0)  c(g(0), 0)\n(3, 0)  c(g(f(g(0))), 0)\n");
    assert_eq!(treesolve(&["oracle", "game", "2", "3"]).status.code(), Some(1));
}

#[test]
fn random_batch_reports_each_seed() {
    let out = treesolve(&["bench", "random", "--depth", "2", "--count", "5", "--seed", "7", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let runs = doc["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 5);
    assert_eq!(runs[0]["seed"], 7);
    assert!(runs.iter().all(|r| r["answer"] == "true" || r["answer"] == "false"));
    assert_eq!(doc["spec"]["n_vars"], 10);
}
