use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emoact::session::{ClientMessage, SessionTrace};

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> PathBuf {
    manifest().join("fixtures").join(name)
}

fn emoact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emoact"))
        .args(args)
        .env_remove("EMOACT_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_script(dir: &Path, msgs: &[ClientMessage]) -> PathBuf {
    let path = dir.join("script.jsonl");
    let text: String = msgs
        .iter()
        .map(|m| emoact::session::encode(m) + "\n")
        .collect();
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_detective_lists_sixteen_paths() {
    let o = emoact(&["validate", "detective"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("16 paths"));
    for label in ["Anger", "Fear", "Happiness", "Sadness"] {
        assert!(out.contains(label));
    }
}

#[test]
fn validate_story_missing_fear_branch() {
    let o = emoact(&["validate", fixture("missing_fear.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fear unreachable on path"));
}

#[test]
fn validate_cyclic_story() {
    let o = emoact(&["validate", fixture("cyclic.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("cycle"));
}

#[test]
fn missing_story_file_is_exit_two() {
    let o = emoact(&["run", "--story", "stories/nope.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("story not found"));
}

#[test]
fn wizard_all_positive_timeline() {
    let o = emoact(&["run", "--story", "wizard"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let choices: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.contains("choice:"))
        .map(|l| l.split_whitespace().nth(3).unwrap().to_string())
        .collect();
    assert_eq!(choices, ["Happiness", "Anger", "Happiness", "Fear"]);
}

#[test]
fn same_script_and_seed_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let script = manifest().join("examples/scripts/wizard_positive.jsonl");
    let a = dir.path().join("a.emoact-trace");
    let b = dir.path().join("b.emoact-trace");
    for out in [&a, &b] {
        let o = emoact(&[
            "run",
            "--script",
            script.to_str().unwrap(),
            "--seed",
            "42",
            "--policy",
            "high",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn replay_ok_then_tampered() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.emoact-trace");
    assert_eq!(
        emoact(&[
            "run",
            "--story",
            "detective",
            "--out",
            trace.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let first = emoact(&["replay", trace.to_str().unwrap()]);
    let second = emoact(&["replay", trace.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).starts_with("replay ok"));
    assert_eq!(first.stdout, second.stdout);

    let mut parsed = SessionTrace::load(&trace).unwrap();
    parsed.records[5].emotion.a += 0.5;
    parsed.save(&trace).unwrap();
    let o = emoact(&["replay", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("seq 5"), "{}", stdout(&o));
}

#[test]
fn rejected_script_event_is_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(
        dir.path(),
        &[
            ClientMessage::start(0, 0, Some("wizard")),
            ClientMessage::Choice {
                seq: 1,
                t: 10,
                option: "go_on_adventure".into(),
            },
        ],
    );
    let o = emoact(&["run", "--script", script.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_pending_decision"));
}

#[test]
fn export_rows_match_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut msgs = vec![ClientMessage::start(0, 0, Some("detective"))];
    msgs.extend((1..10).map(|i| ClientMessage::Tick {
        seq: i,
        t: i * 5000,
    }));
    let script = write_script(dir.path(), &msgs);
    let trace = dir.path().join("t.emoact-trace");
    let o = emoact(&[
        "run",
        "--script",
        script.to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = emoact(&["export", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    let parsed = SessionTrace::load(&trace).unwrap();
    for (row, rec) in rows.iter().zip(&parsed.records) {
        let imp: Vec<f64> = (3..6).map(|i| row[i].parse().unwrap()).collect();
        assert_eq!(imp, rec.impression.value.components().to_vec());
    }

    let o = emoact(&["export", "--format", "jsonl", trace.to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn export_empty_trace_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("empty.emoact-trace");
    SessionTrace::new(
        Default::default(),
        emoact::story::builtin("wizard").unwrap(),
    )
    .save(&trace)
    .unwrap();
    let o = emoact(&["export", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "story = \"wizard\"\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_emoact"))
        .args(["run", "--json"])
        .env("EMOACT_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("apprentice wizard"));

    std::fs::write(&cfg, "nonsense = true\n").unwrap();
    let o = emoact(&["--config", cfg.to_str().unwrap(), "validate", "wizard"]);
    assert_eq!(o.status.code(), Some(2));
}
