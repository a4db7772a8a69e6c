use std::path::Path;
use std::process::Command;

fn fusemot(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_fusemot")).current_dir(dir).args(args).output().unwrap();
    assert!(out.status.success(), "fusemot {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn synth_calibrate_lift_fuse_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fusemot(d, &["synth", "--seed", "2", "--agents", "3", "--frames", "20", "--complementary", "--safety-line", "4,5;-4,5", "--out", "scene"]);
    for f in ["gt.txt", "annotations.json", "calibration.json", "source1.trk", "source4.trk", "depth/000001.pgm"] {
        assert!(d.join("scene").join(f).exists(), "synth did not write {f}");
    }
    fusemot(
        d,
        &["calibrate", "--detections", "scene/gt.txt", "--depth", "scene/depth", "--calibration", "scene/calibration.json", "--out", "calib"],
    );
    assert!(d.join("calib/plane.json").is_file());
    fusemot(
        d,
        &[
            "lift", "--detections", "scene/gt.txt", "--depth", "scene/depth", "--calibration", "scene/calibration.json",
            "--plane", "calib/plane.json", "--source", "lifted", "--out", "lift",
        ],
    );
    assert!(d.join("lift/lifted.trk").is_file());
    fusemot(
        d,
        &[
            "fuse", "--tracks", "scene/source1.trk,scene/source2.trk,lift/lifted.trk",
            "--safety-line", "scene/annotations.json", "--out", "fused",
        ],
    );
    assert!(d.join("fused/fused.trk").is_file());
    let safety: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("fused/safety.json")).unwrap()).unwrap();
    assert!(safety["violations"].is_array());

    fusemot(
        d,
        &[
            "sweep", "--sources", "scene/source1.trk,scene/source2.trk,scene/source3.trk",
            "--gt", "scene/annotations.json", "--out", "eval/table.csv",
        ],
    );
    let csv = std::fs::read_to_string(d.join("eval/table.csv")).unwrap();
    assert!(csv.starts_with("scene,setting,sources,"));
    assert_eq!(csv.lines().count(), 1 + 2 * 7, "header plus 7 subsets for each setting");
    assert!(d.join("eval/table.json").is_file());
}

#[test]
fn pipeline_run_reports_cache_hits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cam.txt"), "1,1,0,0,5,5,0.9,-1,-1,-1\n").unwrap();
    std::fs::write(
        d.join("graph.json"),
        r#"{"version": 1, "nodes": [{"id": "ingest", "kind": "ingest2d", "params": {"file": "cam.txt"}}]}"#,
    )
    .unwrap();
    let first = fusemot(d, &["pipeline", "run", "graph.json", "--cache-dir", "cache"]);
    assert!(first.contains("1 of 1 nodes executed"), "{first}");
    let second = fusemot(d, &["pipeline", "run", "graph.json", "--cache-dir", "cache", "--json", "--export", "out"]);
    let report: serde_json::Value = serde_json::from_str(&second).unwrap();
    assert_eq!(report["nodes"][0]["status"], "hit");
    assert!(d.join("out/ingest/cam.txt").is_file());
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fusemot"))
        .current_dir(dir.path())
        .args(["fuse", "--tracks", "absent.trk", "--out", "x"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.trk"));
    assert!(!dir.path().join("x/fused.trk").exists());
}
