use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use timelighting_core::analytics::rank_mobility;
use timelighting_core::ingest::{parse_graph, serialize_layout};
use timelighting_core::synthetic::{season_events, TEAMS};
use timelighting_core::{Interval, Point, PositionSegment, TemporalGraph, TemporalNode};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timelighting"))
        .args(args)
        .env("TIMELIGHTING_LOG", "warn")
        .output()
        .unwrap()
}

fn write_season_csv(path: &Path) {
    let mut text = String::from("timestamp,source,target\n");
    for e in season_events(1) {
        text.push_str(&format!("{},{},{}\n", e.timestamp, e.source, e.target));
    }
    fs::write(path, text).unwrap();
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ingest_reports_twelve_teams() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("events.csv");
    let out = dir.path().join("graph.json");
    write_season_csv(&csv);
    let summary = stdout(&run(&["ingest", "--events", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert!(summary.contains(&format!("nodes: {}", TEAMS.len())), "{summary}");
    assert!(summary.contains("equivalent timeslices: 417"), "{summary}");
    let graph = parse_graph(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(graph.nodes().all(|n| !n.trajectory.is_empty()));

    // re-ingesting the output is structurally the identity
    let again = dir.path().join("again.json");
    stdout(&run(&["ingest", "--graph", out.to_str().unwrap(), "--out", again.to_str().unwrap()]));
    assert_eq!(parse_graph(&fs::read_to_string(&again).unwrap()).unwrap(), graph);
    assert_eq!(fs::read(&again).unwrap(), fs::read(&out).unwrap());
}

#[test]
fn ingest_applies_a_layout() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("events.csv");
    let base = dir.path().join("base.json");
    write_season_csv(&csv);
    stdout(&run(&["ingest", "--events", csv.to_str().unwrap(), "--out", base.to_str().unwrap(), "--seed", "4"]));
    let graph = parse_graph(&fs::read_to_string(&base).unwrap()).unwrap();
    let layout = dir.path().join("layout.json");
    fs::write(&layout, serialize_layout(&graph)).unwrap();
    let laid = dir.path().join("laid.json");
    let summary = stdout(&run(&[
        "ingest",
        "--events",
        csv.to_str().unwrap(),
        "--layout",
        layout.to_str().unwrap(),
        "--out",
        laid.to_str().unwrap(),
    ]));
    assert!(!summary.contains("held at origin"), "{summary}");
    assert_eq!(fs::read(&laid).unwrap(), fs::read(&base).unwrap());
}

#[test]
fn missing_files_fail_with_their_path() {
    let o = run(&["ingest", "--events", "/nonexistent/events.csv", "--out", "/tmp/x.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/events.csv"));
    let o = run(&["analyze", "--graph", "/nonexistent/g.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/g.json"));
}

#[test]
fn malformed_graph_names_the_element() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"nodes": [{"id": "x", "label": "x", "appearance": [[3, 1]]}], "edges": []}"#).unwrap();
    let o = run(&["analyze", "--graph", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("x at byte"), "{err}");
}

fn stationary_graph() -> TemporalGraph {
    let iv = |a: f64, b: f64| Interval::new(a, b).unwrap();
    let nodes: Vec<TemporalNode> = ["a", "b", "c"]
        .iter()
        .enumerate()
        .map(|(i, id)| TemporalNode {
            id: id.to_string(),
            label: id.to_uppercase(),
            appearance: vec![iv(0.0, 100.0)],
            trajectory: vec![PositionSegment::stationary(iv(0.0, 100.0), Point::new(i as f64, 0.0))],
        })
        .collect();
    TemporalGraph::new(nodes, Vec::new()).unwrap()
}

#[test]
fn analyze_reports_mobility_and_guidance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    fs::write(&path, timelighting_core::ingest::serialize_graph(&stationary_graph())).unwrap();
    let report: Value = serde_json::from_str(&stdout(&run(&["analyze", "--graph", path.to_str().unwrap()]))).unwrap();
    assert!(report["ranking"].as_array().unwrap().iter().all(|r| r["length"] == 0.0));
    assert_eq!(report["default_locked"], serde_json::json!(["a", "b", "c"]));
    assert_eq!(report["guidance"], serde_json::json!([]));

    let single = stdout(&run(&["analyze", "--graph", path.to_str().unwrap(), "--locked", "b"]));
    let single: Value = serde_json::from_str(&single).unwrap();
    assert_eq!(single["guidance"], serde_json::json!([]));
    assert_eq!(single["locked"], serde_json::json!(["b"]));

    for bad in [["--window", "50:200"], ["--window", "9:3"], ["--locked", "a,zz"]] {
        let mut args = vec!["analyze", "--graph", path.to_str().unwrap()];
        args.extend(bad);
        assert_eq!(run(&args).status.code(), Some(1), "{bad:?}");
    }
}

#[test]
fn analyze_ranking_equals_the_engine() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("events.csv");
    let out = dir.path().join("graph.json");
    write_season_csv(&csv);
    stdout(&run(&["ingest", "--events", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    let graph = parse_graph(&fs::read_to_string(&out).unwrap()).unwrap();
    let e = graph.extent().unwrap();
    let window = format!("{}:{}", e.start(), e.midpoint());
    let report: Value = serde_json::from_str(&stdout(&run(&[
        "analyze",
        "--graph",
        out.to_str().unwrap(),
        "--window",
        &window,
    ])))
    .unwrap();
    let engine = rank_mobility(&graph, &Interval::new(e.start(), e.midpoint()).unwrap());
    assert_eq!(report["ranking"], serde_json::to_value(&engine).unwrap());
    let schema: Value = serde_json::from_str(timelighting::schemas::schema("analyze").unwrap()).unwrap();
    assert!(jsonschema::is_valid(&schema, &report));
}

#[test]
fn serve_rejects_a_missing_graph() {
    let o = run(&["serve", "--graph", "/nonexistent/g.json", "--port", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
