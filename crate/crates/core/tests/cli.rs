//! Exit codes and file outputs of `prisim`, both in-process and through the
//! built binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use priority_tree::cli::{main_with, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use priority_tree::engine::run_scenario;
use priority_tree::scenario::canned_scenario;
use priority_tree::trace::{parse_trace, trace_to_string, EventKind};
use tempfile::TempDir;

const INTERACT_BASE: &str = "assign 0 S 0\nassign 1 R 0\nassign 2 P 0\n\
                             copier 0 delay 0\nphi-honest 0 delay 1\ncheck all\n";

fn prisim(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("prisim").chain(args.iter().copied()).map(Into::into);
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn bin(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_prisim")).args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn diag_run_with_all_checks_passes() {
    let (code, out, _) = prisim(&["run", "--canned", "DIAG", "--check", "all"]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert!(out.starts_with("ran 200 stages"));
    assert_eq!(out.matches("PASS").count(), 8, "{out}");
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("diag.trace");
    let (code, _) = bin(&["run", "--canned", "DIAG", "--stages", "30", "--trace", p(&trace)]);
    assert_eq!(code, EXIT_PASS);

    // drop one side of the diagonalization
    let mut t = parse_trace(&fs::read_to_string(&trace).unwrap()).unwrap();
    let i = t
        .iter()
        .position(|e| matches!(e.kind, EventKind::Diagonalized { .. }))
        .unwrap();
    t.remove(i);
    let bad = dir.path().join("bad.trace");
    fs::write(&bad, trace_to_string(&t)).unwrap();
    let (code, out) = bin(&["check", "--trace", p(&bad), "--check", "ab_isomorphic"]);
    assert_eq!(code, EXIT_FAIL, "{out}");
    assert!(out.contains("FAIL"));

    let (code, _) = bin(&["run", "--canned", "DIAG", "--stages", "0"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _) = bin(&["run", "--bogus"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn usage_errors() {
    for args in [
        &["run", "--canned", "DIAG", "--stages", "0"][..],
        &["run"],
        &["run", "--canned", "NOPE"],
        &["run", "--canned", "DIAG", "--check", "no_such_check"],
        &["check", "--trace", "/nonexistent/trace"],
        &["frobnicate"],
    ] {
        let (code, _, err) = prisim(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
    assert_eq!(prisim(&["--help"]).0, EXIT_PASS);
}

#[test]
fn requirements_check_needs_a_scenario() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("t");
    fs::write(&trace, trace_to_string(&run_scenario(&canned_scenario("DIAG").unwrap(), Some(20)).trace)).unwrap();
    let (code, _, _) = prisim(&["check", "--trace", p(&trace), "--check", "requirements_at_horizon"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, out, _) = prisim(&[
        "check",
        "--trace",
        p(&trace),
        "--canned",
        "DIAG",
        "--check",
        "requirements_at_horizon",
        "--json",
    ]);
    assert_eq!(code, EXIT_PASS, "{out}");
    // one JSON object per line
    let v: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(v["check"], "requirements_at_horizon");
}

#[test]
fn identical_runs_write_identical_traces() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for t in [&a, &b] {
        let (code, _) = bin(&["run", "--seed", "17", "--stages", "80", "--trace", p(t)]);
        assert_eq!(code, EXIT_PASS);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let (code, out, _) = prisim(&["diff", p(&a), p(&b)]);
    assert_eq!((code, out.as_str()), (EXIT_PASS, ""));
}

#[test]
fn diff_reports_first_divergent_stage() {
    let dir = TempDir::new().unwrap();
    let mut traces = Vec::new();
    for (name, ce) in [("early", "ce 0 40 0000000000\n"), ("late", "ce 0 60 0000000000\n")] {
        let sc = dir.path().join(format!("{name}.sc"));
        fs::write(&sc, format!("stages 80\n{INTERACT_BASE}{ce}")).unwrap();
        let t = dir.path().join(format!("{name}.trace"));
        let (code, out, err) = prisim(&["run", "--scenario", p(&sc), "--trace", p(&t)]);
        assert_eq!(code, EXIT_PASS, "{out}{err}");
        traces.push(t);
    }
    let (code, out, _) = prisim(&["diff", p(&traces[0]), p(&traces[1])]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.starts_with("first divergent stage: 40\n"), "{out}");
    assert!(out.contains("GTailSet"), "{out}");
}

#[test]
fn diff_of_a_shorter_run_is_a_prefix() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    prisim(&["run", "--canned", "GEN-MEET", "--stages", "30", "--trace", p(&a)]);
    prisim(&["run", "--canned", "GEN-MEET", "--stages", "50", "--trace", p(&b)]);
    let (code, out, _) = prisim(&["diff", p(&a), p(&b)]);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(out, "prefix: A (stage 30) is a prefix of B (stage 50)\n");
    let (_, out, _) = prisim(&["diff", p(&b), p(&a)]);
    assert!(out.starts_with("prefix: B (stage 30)"), "{out}");
}

#[test]
fn dot_snapshots_per_stage() {
    let dir = TempDir::new().unwrap();
    let dots = dir.path().join("dots");
    let (code, _, _) = prisim(&["run", "--canned", "DIAG", "--stages", "3", "--dot-dir", p(&dots)]);
    assert_eq!(code, EXIT_PASS);
    let mut names: Vec<String> = fs::read_dir(&dots)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6);
    assert_eq!(names[0], "stage0001_A.dot");
    assert!(fs::read_to_string(dots.join("stage0003_B.dot")).unwrap().starts_with("digraph"));
}

#[test]
fn encode_then_decode() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().join("d.txt");
    fs::write(&d, "digraph 3\n0 1\n1 2\n2 0\n").unwrap();
    let (code, sym, _) = prisim(&["encode", p(&d)]);
    assert_eq!(code, EXIT_PASS);
    assert!(sym.starts_with("symgraph "));
    let s = dir.path().join("s.txt");
    fs::write(&s, &sym).unwrap();
    let (code, back, _) = prisim(&["decode", p(&s)]);
    assert_eq!(code, EXIT_PASS);
    assert!(back.starts_with("digraph 3\n"));
    assert_eq!(back.lines().count(), 4);

    // a triangle alone is not an encoding
    fs::write(&s, "symgraph 3\n0 1\n1 2\n0 2\n").unwrap();
    let (code, out, _) = prisim(&["decode", p(&s)]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("not a valid encoding"), "{out}");

    let (code, dot, _) = prisim(&["encode", "--dot", p(&d)]);
    assert_eq!(code, EXIT_PASS);
    assert!(dot.contains(" -- "));
}

#[test]
fn small_sweep_passes() {
    let (code, out, _) = prisim(&["sweep", "--seeds", "4", "--stages", "40", "--jobs", "2"]);
    assert_eq!(code, EXIT_PASS, "{out}");
}
