use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taskverify"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn parse_prints_dot() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["parse", "apple is heated, then cleaned in a sinkbasin"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "Step 0: StateQuery(apple,hot)\nStep 1: StateQuery(apple,clean)\nStep 0 -> Step 1\n"
    );
}

#[test]
fn align_reads_a_score_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let rows = [[0.5f64, 0.9, 0.1], [0.2, 0.3, 0.8]]
        .iter()
        .map(|r| r.iter().map(|p| p.ln().to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(dir.path().join("scores.csv"), rows).unwrap();
    let o = run(&["align", "scores.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pairs"], serde_json::json!([[0, 1], [1, 2]]));
}

#[test]
fn ged_prints_the_distance() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.dot"), "Step 0: StateQuery(apple,hot)\nStep 1: StateQuery(apple,clean)\nStep 0 -> Step 1\n").unwrap();
    std::fs::write(dir.path().join("b.dot"), "Step 0: StateQuery(apple,hot)\nStep 1: StateQuery(apple,clean)\n").unwrap();
    let o = run(&["ged", "a.dot", "b.dot"], dir.path());
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn generate_is_deterministic_and_verify_mirrors_labels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let gen = |out: &str| run(&["--seed", "7", "generate", "--out", out, "--train", "60", "--novel-tasks", "20", "--novel-steps", "20", "--abstraction", "20"], p);
    assert_eq!(gen("a").status.code(), Some(0));
    assert_eq!(gen("b").status.code(), Some(0));
    for f in ["dataset.jsonl", "stats.json"] {
        assert_eq!(std::fs::read(p.join("a").join(f)).unwrap(), std::fs::read(p.join("b").join(f)).unwrap());
    }

    let lines = std::fs::read_to_string(p.join("a/dataset.jsonl")).unwrap();
    let mut seen = [false; 2];
    for line in lines.lines() {
        let sample: serde_json::Value = serde_json::from_str(line).unwrap();
        let label = sample["label"].as_bool().unwrap();
        if seen[label as usize] {
            continue;
        }
        seen[label as usize] = true;
        std::fs::write(p.join("g.dot"), sample["graph"].as_str().unwrap()).unwrap();
        std::fs::write(p.join("t.json"), serde_json::to_string(&sample["trace"]).unwrap()).unwrap();
        let o = run(&["verify", "--graph", "g.dot", "--trace", "t.json", "--scorer", "oracle", "--alignment-out", "al.csv"], p);
        assert_eq!(o.status.code(), Some(if label { 0 } else { 1 }));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["label"].as_bool(), Some(label));
        let csv = std::fs::read_to_string(p.join("al.csv")).unwrap();
        assert!(csv.starts_with("extension_index,query_id,segment_index,log_score"));
    }
    assert_eq!(seen, [true, true]);

    let o = run(&["evaluate", "--data", "a", "--out", "metrics.csv"], p);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["overall"]["f1"].as_f64(), Some(1.0));

    let o = run(&["sweep", "--data", "a", "--ks", "10,40"], p);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().count() > 2);

    let o = run(&["--seed", "1", "train", "--data", "a", "--out", "ck.json", "--epochs", "2"], p);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["detect", "--data", "a", "--scorer", "ck.json"], p);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("class,tp,fp,tn,fn,precision,recall\nheat,"));
}

#[test]
fn infeasible_split_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["generate", "--out", "x", "--train", "5", "--holdout-pairs", "0.99"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error: InfeasibleSplit: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn bad_flags_fail_fast() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["parse", "--bogus", "x"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["--window-k", "0", "parse", "apple is heated"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["--threshold", "1.5", "parse", "apple is heated"], dir.path()).status.code(), Some(2));
    let o = run(&["verify", "--graph", "missing.dot", "--trace", "t.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: IoError: "));
}

#[test]
fn help_lists_global_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for flag in ["--seed", "--threshold", "--window-k", "--extension-cap", "--strict-vocab"] {
        assert!(text.contains(flag), "{flag}");
    }
    for cmd in ["generate", "train", "verify", "evaluate", "parse", "align", "ged", "sweep", "detect"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
