//! Runs the `ilp` binary and checks outputs and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn ilp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ilp")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn rules(name: &str) -> String {
    fixtures().join("rules").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value of a `% key: ...` line in `learn` output.
fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("% {key}: ")))
        .unwrap_or_else(|| panic!("no {key} line in {out}"))
        .to_string()
}

fn generated(out: &str) -> u64 {
    field(out, "candidates").split_whitespace().find_map(|kv| kv.strip_prefix("generated=")).unwrap().parse().unwrap()
}

#[test]
fn learn_intro() {
    let o = ilp(&["learn", &fixture("intro")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("f(A) ← gt(A,3), lt(A,8), odd(A).\n"), "{out}");
    assert_eq!(field(&out, "score"), "errors=0 literals=4");
    assert_eq!(field(&out, "termination"), "perfect-at-size");
}

#[test]
fn pruning_generates_fewer_candidates() {
    let on = ilp(&["learn", &fixture("intro"), "--pointless", "on"]);
    let off = ilp(&["learn", &fixture("intro"), "--pointless", "off"]);
    assert_eq!(field(&stdout(&on), "score"), field(&stdout(&off), "score"));
    assert!(generated(&stdout(&on)) < generated(&stdout(&off)));
}

#[test]
fn small_size_limit_exhausts_with_errors() {
    let o = ilp(&["learn", &fixture("intro"), "--max-size", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "termination"), "exhausted");
    assert!(!field(&out, "score").starts_with("errors=0 "), "{out}");
}

#[test]
fn stats_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("run.json");
    let csv = dir.path().join("run.csv");
    let o = ilp(&[
        "learn",
        &fixture("trains-mini"),
        "--stats",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"], "both");
    assert_eq!(report["seed"], 7);
    assert_eq!(report["errors"], 0);
    for key in ["candidates_generated", "candidates_tested", "time_total_s", "time_detection_s", "constraints", "evidence"] {
        assert!(report["stats"].get(key).is_some(), "missing {key}");
    }
    let overhead = report["detection_overhead"].as_f64().unwrap();
    let s = &report["stats"];
    let total = s["time_total_s"].as_f64().unwrap();
    assert_eq!(overhead, s["time_detection_s"].as_f64().unwrap() / total);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("schema_version,task,config"));
    assert!(lines.next().unwrap().starts_with("1,trains-mini,both,0,ok,perfect-at-size,0,4,"));
}

#[test]
fn audit_reports_checked_hypotheses() {
    let o = ilp(&["learn", &fixture("intro"), "--audit"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(field(&stdout(&o), "audit").ends_with("no violations"));
}

#[test]
fn check_reports_findings_with_exit_3() {
    let cases = [
        ("intro", "odd-int.pl", "reducible: f(A) ← int(A), odd(A). redundant literal: int(A)\n"),
        ("intro", "lt-ten.pl", "indiscriminate: f(A) ← lt(A,10). redundant literal: lt(A,10)\n"),
        ("transitive-gt", "gt-chain.pl", "reducible: h ← gt(A,B), gt(A,C), gt(B,C). redundant literal: gt(A,C)\n"),
    ];
    for (task, file, expected) in cases {
        let o = ilp(&["check", &fixture(task), &rules(file)]);
        assert_eq!(o.status.code(), Some(3), "{file}");
        assert_eq!(stdout(&o), expected);
    }
    let o = ilp(&["check", &fixture("eight-puzzle-mini"), &rules("role-index.pl")]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.contains("indiscriminate: ") && out.contains("redundant literal: role(B)"), "{out}");
    assert!(out.contains("redundant literal: index(C)"), "{out}");
}

#[test]
fn check_clean_rules_exit_0() {
    for file in ["intro-target.pl", "member.pl"] {
        let o = ilp(&["check", &fixture("intro"), &rules(file)]);
        assert_eq!(o.status.code(), Some(0), "{file}: {}", stderr(&o));
        assert_eq!(stdout(&o), "no pointless rules found\n");
    }
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(ilp(&["learn"]).status.code(), Some(2));
    assert_eq!(ilp(&["learn", &fixture("intro"), "--pointless", "sometimes"]).status.code(), Some(2));
    let missing = ilp(&["learn", &fixture("no-such-task")]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).starts_with("error: "));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pl");
    std::fs::write(&bad, "f(A) :- odd(A\n").unwrap();
    let o = ilp(&["check", &fixture("intro"), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.pl:"), "{}", stderr(&o));
}

#[test]
fn unsafe_rule_in_check_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unsafe.pl");
    std::fs::write(&path, "f(A) :- odd(B).\n").unwrap();
    let o = ilp(&["check", &fixture("intro"), path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unsafe"), "{}", stderr(&o));
}

#[test]
fn timeout_without_result_exits_4() {
    let o = ilp(&["learn", &fixture("intro"), "--timeout", "0"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).is_empty());
}

#[test]
fn oracle_certifies_intro() {
    let o = ilp(&["oracle", &fixture("intro"), "--max-size", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("% optimum: errors=0 literals=4\n"), "{out}");
    assert!(out.contains("f(A) ← gt(A,3), lt(A,8), odd(A).\n"));

    let seq = ilp(&["oracle", &fixture("intro"), "--max-size", "4", "--sequential"]);
    assert_eq!(stdout(&seq), out);
}

#[test]
fn oracle_refuses_above_the_ceiling() {
    let o = ilp(&["oracle", &fixture("intro"), "--ceiling", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ceiling"), "{}", stderr(&o));
}

#[test]
fn bench_writes_every_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let o = ilp(&["bench", &fixture("trains-mini"), "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let records: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let configs: Vec<&str> = records.iter().map(|r| r["config"].as_str().unwrap()).collect();
    assert_eq!(configs, ["off", "reducible-only", "indiscriminate-only", "both"]);

    let csv = ilp(&["bench", &fixture("trains-mini"), "--repeats", "2"]);
    assert_eq!(csv.status.code(), Some(0));
    assert_eq!(stdout(&csv).lines().count(), 1 + 4 * 2);
}

#[test]
fn bench_on_empty_suite_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ilp(&["bench", dir.path().to_str().unwrap()]).status.code(), Some(2));
}
