use std::fs;
use std::path::Path;

use fusemot::ops::OpError;
use fusemot::pipeline::{export_outputs, run_graph, Graph, NodeStatus, PipelineError, RunOptions};
use serde_json::json;

fn graph(value: serde_json::Value) -> Graph {
    Graph::parse(&value.to_string()).unwrap()
}

fn ingest_graph() -> Graph {
    graph(json!({
        "version": 1,
        "nodes": [
            {"id": "ingest", "kind": "ingest2d", "params": {"file": "cam.txt", "min_confidence": 0.5}},
            {"id": "again", "kind": "ingest2d", "inputs": ["ingest"], "params": {"file": "cam.txt", "source": "copy"}}
        ]
    }))
}

fn opts(base: &Path) -> RunOptions {
    RunOptions { base_dir: base.to_path_buf(), cache_dir: base.join("cache") }
}

#[test]
fn upstream_file_wins_over_external_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cam.txt"), "1,1,0,0,5,5,0.9,-1,-1,-1\n1,2,0,0,5,5,0.1,-1,-1,-1\n").unwrap();
    let report = run_graph(&ingest_graph(), &opts(dir.path())).unwrap();
    let copied = fs::read_to_string(report.output("again").unwrap().join("copy.txt")).unwrap();
    assert_eq!(copied.lines().count(), 1, "second node reads the filtered upstream file");
}

#[test]
fn external_file_edit_invalidates_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cam = dir.path().join("cam.txt");
    fs::write(&cam, "1,1,0,0,5,5,0.9,-1,-1,-1\n").unwrap();
    let g = ingest_graph();
    assert_eq!(run_graph(&g, &opts(dir.path())).unwrap().executed(), ["ingest", "again"]);
    assert!(run_graph(&g, &opts(dir.path())).unwrap().executed().is_empty());
    fs::write(&cam, "1,1,0,0,5,5,0.9,-1,-1,-1\n2,1,1,0,5,5,0.9,-1,-1,-1\n").unwrap();
    let report = run_graph(&g, &opts(dir.path())).unwrap();
    assert_eq!(report.executed(), ["ingest", "again"]);
    assert!(report.nodes.iter().all(|n| n.status == NodeStatus::Executed));
}

#[test]
fn missing_input_names_the_node() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_graph(&ingest_graph(), &opts(dir.path())).unwrap_err();
    match err {
        PipelineError::Node { node, source: OpError::MissingInput(name) } => {
            assert_eq!(node, "ingest");
            assert_eq!(name, "cam.txt");
        }
        other => panic!("unexpected error {other}"),
    }
    let cache = dir.path().join("cache");
    let leftovers = fs::read_dir(&cache).map(|d| d.count()).unwrap_or(0);
    assert_eq!(leftovers, 0, "failed nodes leave no cache entries");
}

#[test]
fn unknown_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cam.txt"), "1,1,0,0,5,5,0.9,-1,-1,-1\n").unwrap();
    let g = graph(json!({"version": 1, "nodes": [{"id": "x", "kind": "ingest2d", "params": {"file": "cam.txt", "bogus": 1}}]}));
    assert!(matches!(run_graph(&g, &opts(dir.path())), Err(PipelineError::Node { source: OpError::Params(_), .. })));
}

#[test]
fn export_copies_node_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cam.txt"), "1,1,0,0,5,5,0.9,-1,-1,-1\n").unwrap();
    let report = run_graph(&ingest_graph(), &opts(dir.path())).unwrap();
    let dest = dir.path().join("export");
    export_outputs(&report, &dest).unwrap();
    assert!(dest.join("ingest/cam.txt").is_file());
    assert!(dest.join("again/copy.txt").is_file());
}

#[test]
fn graph_json_round_trips() {
    let g = ingest_graph();
    let back = Graph::parse(&g.to_json()).unwrap();
    assert_eq!(back.to_json(), g.to_json());
}
