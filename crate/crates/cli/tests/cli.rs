//! Exit-code policy and flag behavior of the `qir-sentinel` binary.

use std::path::PathBuf;
use std::process::Command;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

struct Run {
    code: Option<i32>,
    stdout: String,
    stderr: String,
}

fn sentinel(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_qir-sentinel"))
        .args(args)
        .env("QIR_SENTINEL_COLOR", "never")
        .current_dir(corpus_dir())
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code(),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

#[test]
fn clean_file_exits_zero() {
    let run = sentinel(&["sample.ll"]);
    assert_eq!(run.code, Some(0));
    assert!(run.stdout.contains("0 errors"));
}

#[test]
fn error_diagnostics_exit_one() {
    let run = sentinel(&["--format", "json", "deadqubit.ll"]);
    assert_eq!(run.code, Some(1));
    assert!(run.stdout.contains("\"UseAfterReleaseQubit\""));
    // Exactly one error in the JSON summary.
    assert!(run.stdout.contains("\"errors\":1"), "{}", run.stdout);
}

#[test]
fn missing_file_exits_two() {
    let run = sentinel(&["no_such_file.ll"]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.contains("cannot read"));
}

#[test]
fn unknown_flag_exits_two_with_usage() {
    let run = sentinel(&["--frobnicate", "sample.ll"]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.to_lowercase().contains("usage"));
}

#[test]
fn parse_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.ll");
    std::fs::write(&path, "define void @f() {\nentry:\n  ret\n}\n").unwrap();
    let run = sentinel(&[path.to_str().unwrap()]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.contains("ret requires"));
}

#[test]
fn validation_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dangling.ll");
    std::fs::write(&path, "define void @f() {\nentry:\n  br label %exit\n}\n").unwrap();
    let run = sentinel(&[path.to_str().unwrap()]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.contains("missing label"));
}

#[test]
fn multiple_files_report_in_argument_order() {
    let run = sentinel(&["sample.ll", "deadqubit.ll", "cloning.ll"]);
    assert_eq!(run.code, Some(1), "worst finding wins");
    let sample_at = run.stdout.find("sample.ll:").expect("sample report");
    let dead_at = run.stdout.find("deadqubit.ll:").expect("deadqubit report");
    let clone_at = run.stdout.find("cloning.ll:").expect("cloning report");
    assert!(sample_at < dead_at && dead_at < clone_at);
}

#[test]
fn failure_beats_error_in_exit_code() {
    let run = sentinel(&["deadqubit.ll", "no_such_file.ll"]);
    assert_eq!(run.code, Some(2));
}

#[test]
fn entry_flag_restricts_analysis() {
    let run = sentinel(&["--entry", "NewQubit__body", "deadqubit.ll"]);
    assert_eq!(run.code, Some(0), "the helper alone is clean");
    let run = sentinel(&["--entry", "Deadqubit__body", "deadqubit.ll"]);
    assert_eq!(run.code, Some(1));
    let run = sentinel(&["--entry", "Nonexistent", "deadqubit.ll"]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.contains("not defined"));
}

#[test]
fn fail_fast_reports_only_the_first_error() {
    let full = sentinel(&["--format", "json", "cloning.ll"]);
    assert!(full.stdout.contains("CloneControlTarget"));
    let fast = sentinel(&["--fail-fast", "--format", "json", "cloning.ll"]);
    assert_eq!(fast.code, Some(1));
    assert!(fast.stdout.contains("CloneInArrayStore"));
    assert!(!fast.stdout.contains("CloneControlTarget"));
}

#[test]
fn gate_table_file_extends_recognized_gates() {
    let dir = tempfile::tempdir().unwrap();
    let gates = dir.path().join("gates.txt");
    std::fs::write(&gates, "# project gates\nfoo\n").unwrap();
    let run = sentinel(&[
        "--gates",
        gates.to_str().unwrap(),
        "--format",
        "json",
        "unknown_gate.ll",
    ]);
    assert_eq!(run.code, Some(0));
    assert!(
        !run.stdout.contains("UnknownGate"),
        "foo is recognized now: {}",
        run.stdout
    );

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "foo:wat\n").unwrap();
    let run = sentinel(&["--gates", bad.to_str().unwrap(), "unknown_gate.ll"]);
    assert_eq!(run.code, Some(2));
}

#[test]
fn color_env_always_emits_ansi() {
    let out = Command::new(env!("CARGO_BIN_EXE_qir-sentinel"))
        .args(["deadqubit.ll"])
        .env("QIR_SENTINEL_COLOR", "always")
        .current_dir(corpus_dir())
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("\x1b[1;31m"));

    let out = Command::new(env!("CARGO_BIN_EXE_qir-sentinel"))
        .args(["deadqubit.ll"])
        .env("QIR_SENTINEL_COLOR", "never")
        .current_dir(corpus_dir())
        .output()
        .unwrap();
    assert!(!String::from_utf8_lossy(&out.stdout).contains("\x1b["));
}

#[test]
fn json_report_round_trips() {
    let run = sentinel(&["--format", "json", "cloning.ll"]);
    let report = qir_sentinel_core::parse_json_report(&run.stdout).expect("valid JSON report");
    assert_eq!(report.summary.errors, 2);
    assert_eq!(qir_sentinel_core::render_json(&report), run.stdout);
}

// ---- corpus subcommand -------------------------------------------------------

#[test]
fn corpus_passes_on_shipped_fixtures() {
    let run = sentinel(&["corpus", ".", "expectations.txt"]);
    assert_eq!(
        run.code,
        Some(0),
        "stdout: {}\nstderr: {}",
        run.stdout,
        run.stderr
    );
    assert!(run.stdout.contains("corpus: 26 passed, 0 failed"));
}

#[test]
fn corpus_flags_wrong_expectation_with_a_one_line_diff() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(
        corpus_dir().join("deadqubit.ll"),
        dir.path().join("deadqubit.ll"),
    )
    .unwrap();
    let expectations = dir.path().join("expect.txt");
    std::fs::write(&expectations, "deadqubit.ll: CloneControlTarget@4\n").unwrap();
    let run = sentinel(&[
        "corpus",
        dir.path().to_str().unwrap(),
        expectations.to_str().unwrap(),
    ]);
    assert_eq!(run.code, Some(1));
    let fail_line = run
        .stdout
        .lines()
        .find(|l| l.starts_with("FAIL deadqubit.ll"))
        .expect("one-line diff");
    assert!(fail_line.contains("expected [CloneControlTarget@4]"));
    assert!(fail_line.contains("got [UseAfterReleaseQubit@4]"));
}

#[test]
fn corpus_empty_dir_passes_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let expectations = dir.path().join("expect.txt");
    std::fs::write(&expectations, "").unwrap();
    let run = sentinel(&[
        "corpus",
        dir.path().to_str().unwrap(),
        expectations.to_str().unwrap(),
    ]);
    assert_eq!(run.code, Some(0));
    assert!(run.stderr.contains("warning"));
}

#[test]
fn corpus_malformed_expectations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(corpus_dir().join("sample.ll"), dir.path().join("sample.ll")).unwrap();
    let expectations = dir.path().join("expect.txt");
    std::fs::write(&expectations, "sample.ll: NotAKind@10\n").unwrap();
    let run = sentinel(&[
        "corpus",
        dir.path().to_str().unwrap(),
        expectations.to_str().unwrap(),
    ]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.contains("malformed expectations"));
}

#[test]
fn corpus_unlisted_fixture_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(corpus_dir().join("sample.ll"), dir.path().join("sample.ll")).unwrap();
    std::fs::copy(
        corpus_dir().join("rotation.ll"),
        dir.path().join("rotation.ll"),
    )
    .unwrap();
    let expectations = dir.path().join("expect.txt");
    std::fs::write(&expectations, "sample.ll: ReleaseQubitInArray@10\n").unwrap();
    let run = sentinel(&[
        "corpus",
        dir.path().to_str().unwrap(),
        expectations.to_str().unwrap(),
    ]);
    assert_eq!(run.code, Some(1));
    assert!(run
        .stdout
        .contains("FAIL rotation.ll: no expectation recorded"));
}

#[test]
fn no_input_files_exits_two() {
    let run = sentinel(&[]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.contains("no input files"));
}
