//! Corpus loading and the command-line front end.

mod common;

use std::process::Command;

use clap::Parser;
use common::{baker_street, corpus_path};
use metaconflict::cli::{render, Args, RunError};
use metaconflict::corpus::{load_corpus, parse_corpus, to_toml, CorpusError};

fn args(extra: &[&str]) -> Args {
    let input = corpus_path("baker-street.toml");
    let mut argv = vec!["metaconflict".to_string(), input.display().to_string()];
    argv.extend(extra.iter().map(|s| s.to_string()));
    Args::try_parse_from(argv).unwrap()
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metaconflict"))
}

#[test]
fn baker_street_corpus_matches_the_builder() {
    let corpus = load_corpus(corpus_path("baker-street.toml")).unwrap();
    let (frame, evidences, dist) = baker_street();
    assert_eq!(corpus.frame, frame);
    assert_eq!(corpus.evidences, evidences);
    assert_eq!(corpus.distribution, dist);
}

#[test]
fn missing_mass_goes_to_the_whole_frame() {
    let source = r#"
[frame]
actions = ["B", "R"]
events = ["E1"]

[[distribution]]
count = 1
mass = 1.0

[[evidence]]
id = "w"
focals = [{ actions = ["B"], mass = 0.8 }]
"#;
    let corpus = parse_corpus(source).unwrap();
    let e = &corpus.evidences[0];
    assert_eq!(e.focals().len(), 2);
    let theta = e.focals().iter().find(|p| p.0.is_full()).unwrap();
    assert!((theta.1 - 0.2).abs() < 1e-12);
}

#[test]
fn overfull_evidence_is_rejected_with_its_line() {
    let source = r#"[frame]
actions = ["B", "R"]
events = ["E1"]

[[distribution]]
count = 1
mass = 1.0

[[evidence]]
id = "w"
focals = [
  { actions = ["B"], mass = 0.7 },
  { actions = ["R"], mass = 0.5 },
]
"#;
    match parse_corpus(source) {
        Err(CorpusError::Invalid { line, field, .. }) => {
            assert_eq!(line, 9);
            assert!(field.starts_with("evidence[0]"), "{field}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn empty_action_list_is_rejected() {
    let source = r#"[frame]
actions = ["B", "R"]
events = ["E1"]

[[distribution]]
count = 1
mass = 1.0

[[evidence]]
id = "w"
focals = [{ actions = [], mass = 0.7 }]
"#;
    match parse_corpus(source) {
        Err(CorpusError::Invalid { line, .. }) => assert_eq!(line, 11),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn corpora_survive_a_round_trip() {
    for name in ["baker-street.toml", "two-witnesses.toml"] {
        let corpus = load_corpus(corpus_path(name)).unwrap();
        let again = parse_corpus(&to_toml(&corpus)).unwrap();
        assert_eq!(again, corpus, "{name}");
    }
}

#[test]
fn text_trace_ends_with_the_answer() {
    let text = render(&args(&["--trace"])).unwrap();
    let last = text.lines().rev().find(|l| !l.trim().is_empty()).unwrap();
    assert!(last.contains("answer {χ_1, χ_2}"), "{last}");
    assert!(text.contains("0.768"));
}

#[test]
fn forced_single_subset() {
    let json = render(&args(&["--subsets", "1", "--format", "json"])).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["subset_count"], 1);
    let mcf = v["metaconflict"].as_f64().unwrap();
    assert!((mcf - 0.8836).abs() < 1e-9);
}

#[test]
fn oracle_agrees_on_the_example() {
    let json = render(&args(&["--oracle", "--format", "json"])).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["oracle"]["agrees"], true);
    assert_eq!(v["oracle"]["same_partition"], true);
}

#[test]
fn json_reports_are_byte_identical() {
    let a = render(&args(&["--trace", "--oracle", "--format", "json"])).unwrap();
    let b = render(&args(&["--trace", "--oracle", "--format", "json"])).unwrap();
    assert_eq!(a, b);
    assert!(a.ends_with('\n'));
    assert!(a.contains("\"metaconflict\": 0.768000000"));
}

#[test]
fn bad_tolerance_is_refused() {
    let err = render(&args(&["--tolerance=-1"])).unwrap_err();
    assert!(matches!(err, RunError::Tolerance(_)));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn binary_succeeds_on_the_example() {
    let out = binary()
        .arg(corpus_path("baker-street.toml"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("0.768"));
}

#[test]
fn binary_writes_to_a_file() {
    let dir = std::env::temp_dir().join(format!("metaconflict-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let status = binary()
        .arg(corpus_path("baker-street.toml"))
        .args(["-f", "json", "-o"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["subset_count"], 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_exit_codes() {
    let infeasible = binary()
        .arg(corpus_path("two-witnesses.toml"))
        .args(["--subsets", "3"])
        .output()
        .unwrap();
    assert_eq!(infeasible.status.code(), Some(3));
    assert!(!infeasible.stderr.is_empty());

    let missing = binary()
        .arg(corpus_path("no-such-file.toml"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let unwritable = binary()
        .arg(corpus_path("baker-street.toml"))
        .args(["-o", "/nonexistent-dir/report.txt"])
        .output()
        .unwrap();
    assert_eq!(unwritable.status.code(), Some(4));
}
