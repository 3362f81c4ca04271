use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn symbreak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbreak"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Compares against `tests/golden/<name>`. Set `SYMBREAK_BLESS=1` to rewrite.
fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("SYMBREAK_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden {name}");
}

#[test]
fn decide_examples() {
    let cases: [(&[&str], i32, &str); 4] = [
        (&["--model", "blackboard", "--sources", "1,2,2"], 0, "solvable (n_1=1)"),
        (&["--model", "mp", "--sources", "2,2", "--ports", "adversarial"], 2, "unsolvable (gcd=2)"),
        (&["--model", "mp", "--sources", "2,2", "--ports", "random:5"], 3, "unknown (fixed ports, g>1)"),
        (&["--model", "blackboard", "--sources", "2,2"], 2, "unsolvable (min n_i=2)"),
    ];
    for (flags, code, text) in cases {
        let mut args = vec!["decide"];
        args.extend_from_slice(flags);
        let out = symbreak(&args);
        assert_eq!(out.status.code(), Some(code), "{flags:?}");
        assert_eq!(stdout(&out).trim(), text, "{flags:?}");
    }
}

#[test]
fn invalid_configurations_exit_1() {
    for args in [
        &["decide", "--sources", "0,2"][..],
        &["decide", "--sources", "x"],
        &["decide"],
        &["analyze", "--sources", "1,2", "--t", "3..x"],
        &["decide", "--assignment", "/nonexistent.json"],
        &["simulate", "--protocol", "bb-le", "--sources", "1,2", "--trace"],
    ] {
        assert_eq!(symbreak(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn assignment_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alpha.json");
    fs::write(&path, r#"{"n": 3, "source_of": [2, 1, 2]}"#).unwrap();
    let out = symbreak(&["decide", "--assignment", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    fs::write(&path, r#"{"n": 3, "source_of": [3, 1, 3]}"#).unwrap();
    assert_eq!(symbreak(&["decide", "--assignment", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn analyze_examples() {
    let out = symbreak(&["analyze", "--sources", "1,1", "--t", "1..4"]);
    assert_eq!(out.status.code(), Some(0));
    golden("analyze_1_1.csv", &stdout(&out));
    let probs: Vec<(String, String)> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].to_string(), f[2].to_string())
        })
        .collect();
    let expected: Vec<(String, String)> =
        [(1, 2), (3, 4), (7, 8), (15, 16)].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    assert_eq!(probs, expected);

    let out = symbreak(&["analyze", "--model", "blackboard", "--sources", "2,2", "--t", "0..4"]);
    assert!(stdout(&out).lines().skip(1).all(|l| l.split(',').nth(1) == Some("0")));
    golden("analyze_2_2.csv", &stdout(&out));
}

#[test]
fn analyze_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = symbreak(&["analyze", "--sources", "1,2", "--t", "0..3", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    golden("curve_1_2.csv", &csv);
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("curve.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 4);
    assert_eq!(json["model"], "blackboard");

    let out = symbreak(&["analyze", "--sources", "1,2", "--t", "3..1", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(dir.path().join("curve.csv")).unwrap(),
        "t,numerator,denominator,solving_count,total_count\n"
    );
}

#[test]
fn caps_exit_4() {
    let out = symbreak(&["analyze", "--sources", "1,1,1", "--t", "0..9"]);
    assert_eq!(out.status.code(), Some(4));
    let out = symbreak(&["complex", "--kind", "realizations", "--n", "3", "--t", "9", "--cap", "12"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn decide_agrees_with_analyze() {
    let partitions = [
        "1", "2", "1,1", "3", "2,1", "1,1,1", "4", "3,1", "2,2", "2,1,1", "1,1,1,1",
    ];
    for sources in partitions {
        for model in ["blackboard", "mp"] {
            let decided = symbreak(&["decide", "--model", model, "--sources", sources]);
            let curve = symbreak(&["analyze", "--model", model, "--sources", sources, "--t", "0..3"]);
            assert_eq!(curve.status.code(), Some(0));
            let positive = stdout(&curve)
                .lines()
                .skip(1)
                .any(|l| l.split(',').nth(1) != Some("0"));
            assert_eq!(decided.status.code() == Some(0), positive, "{model} {sources}");
        }
    }
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--protocol", "gcd-le", "--sources", "2,3", "--trials", "300", "--seed", "42"];
    let first = symbreak(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, symbreak(&args).stdout);
    golden("simulate_gcd_2_3.json", &stdout(&first));
    let json: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert!(json["success_rate"].as_f64().unwrap() >= 0.99);
}

#[test]
fn simulate_matching_sizes() {
    let out = symbreak(&["simulate", "--protocol", "matching", "--sources", "2,3", "--trials", "200", "--seed", "3"]);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["matching_sizes"], serde_json::json!({"2": 200}));
}

#[test]
fn simulate_writes_summary_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "simulate", "--protocol", "bb-le", "--sources", "1,2", "--trials", "4", "--seed", "9", "--out", d, "--trace",
    ];
    let out = symbreak(&args);
    assert_eq!(out.status.code(), Some(0));
    let summary = fs::read(dir.path().join("summary.json")).unwrap();
    assert_eq!(summary, out.stdout);
    let traces = fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    golden("trace_bb_1_2.jsonl", &traces);
    for line in traces.lines() {
        let rec: Value = serde_json::from_str(line).unwrap();
        assert!(rec["trial"].as_u64().unwrap() < 4);
        assert!(rec["party"].as_u64().unwrap() < 3);
    }
}

#[test]
fn strict_flags_timeouts() {
    let args = ["simulate", "--protocol", "bb-le", "--sources", "2,2", "--trials", "10", "--max-rounds", "8"];
    assert_eq!(symbreak(&args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(symbreak(&strict).status.code(), Some(4));
}

#[test]
fn task_by_leader_with_inputs() {
    let out = symbreak(&[
        "simulate", "--protocol", "task-by-leader", "--task", "max", "--sources", "1,2", "--inputs", "4,9,2",
        "--trials", "50",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["successes"].as_u64().unwrap() > 40);
}

#[test]
fn complex_examples() {
    let out = symbreak(&["complex", "--kind", "pi-output", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    golden("pi_output_le_3.dot", &stdout(&out));

    let out = symbreak(&["complex", "--kind", "pi-output", "--n", "3", "--format", "json"]);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    let facets = json["facets"].as_array().unwrap();
    let vertices: std::collections::BTreeSet<String> =
        facets.iter().flat_map(|f| f.as_array().unwrap()).map(|v| v.to_string()).collect();
    assert_eq!(vertices.len(), 6);
    // the leader is alone with its value
    assert!(facets.iter().filter(|f| f.as_array().unwrap().len() == 1).count() == 3);

    let out = symbreak(&["complex", "--kind", "pi-tilde", "--rho", "0,1,1", "--format", "json"]);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["facets"].as_array().unwrap().len(), 2);
    golden("pi_tilde_011.json", &stdout(&out));

    let out = symbreak(&["complex", "--kind", "realizations", "--n", "1", "--t", "1", "--format", "json"]);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["facets"].as_array().unwrap().len(), 2);
    golden("realizations_n1_t1.dot", &stdout(&symbreak(&["complex", "--kind", "realizations", "--n", "1"])));
}
