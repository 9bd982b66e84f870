use std::path::Path;
use std::process::Command;

use isodecode::example::example_mask;
use isodecode::formats::{parse_stream, write_mask, CodeSpec};
use isodecode_cli::{channel_model, cmd_decode, cmd_encode, cmd_erase, cmd_gen_example, cmd_inspect, cmd_simulate};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isodecode"))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn example_spec_is_stable() {
    let out = cmd_gen_example().unwrap();
    let spec = CodeSpec::parse(&out.artifact).unwrap();
    assert_eq!((spec.n, spec.k, spec.delta), (5, 3, 2));
    assert_eq!(spec.to_text(), out.artifact);
}

#[test]
fn clean_stream_decodes_to_itself() {
    let spec = cmd_gen_example().unwrap().artifact;
    let frame = cmd_encode(&spec, None, 4, 3).unwrap().artifact;
    let out = cmd_decode(&spec, &frame, None, false).unwrap();
    assert!(out.success);
    assert_eq!(out.artifact, frame);
    let report: serde_json::Value = serde_json::from_str(out.report.as_deref().unwrap()).unwrap();
    let statuses = report["symbols"].as_array().unwrap().iter().flat_map(|b| b.as_array().unwrap().clone());
    assert!(statuses.into_iter().all(|s| s["status"] == "received_clean"));
}

#[test]
fn baseline_waits_on_example_pattern() {
    let spec = cmd_gen_example().unwrap().artifact;
    let frame = cmd_encode(&spec, None, 1, 3).unwrap().artifact;
    let model = channel_model(None, None, None, Some(&write_mask(&example_mask())), 0).unwrap();
    let erased = cmd_erase(&frame, &model).unwrap().artifact;
    let parsed = CodeSpec::parse(&spec).unwrap();
    assert_eq!(parse_stream(&parsed.field, &erased).unwrap().mask(), example_mask());
    let base = cmd_decode(&spec, &erased, None, true).unwrap();
    let report: serde_json::Value = serde_json::from_str(base.report.as_deref().unwrap()).unwrap();
    assert_eq!(report["symbols"][0][0], serde_json::json!({"status": "recovered", "time": 1}));
    let low = cmd_decode(&spec, &erased, None, false).unwrap();
    let report: serde_json::Value = serde_json::from_str(low.report.as_deref().unwrap()).unwrap();
    assert_eq!(report["symbols"][0][0], serde_json::json!({"status": "recovered", "time": 0}));
    assert_eq!(report["symbols"][2][0], serde_json::json!({"status": "recovered", "time": 3}));
}

#[test]
fn inspect_reports_properties() {
    let spec = cmd_gen_example().unwrap().artifact;
    let out = cmd_inspect(&spec, None, 3).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out.artifact).unwrap();
    assert_eq!(v["profile"]["delta"], 2);
    assert_eq!(v["mdp_system"], true);
    assert_eq!(v["quality"]["property1"], serde_json::json!([true]));
    assert_eq!(v["quality"]["property2"], serde_json::json!([true]));
}

#[test]
fn simulate_small_run() {
    let spec = cmd_gen_example().unwrap().artifact;
    let model = channel_model(Some(0.1), None, None, None, 0).unwrap();
    let a = cmd_simulate(&spec, &model, 20, 3, None, 5).unwrap();
    let b = cmd_simulate(&spec, &model, 20, 3, None, 5).unwrap();
    assert_eq!(a.artifact, b.artifact);
    let bad = channel_model(Some(0.1), None, Some("0.1,0.2,1"), None, 0);
    assert!(bad.is_err());
    assert!(channel_model(None, None, Some("0.1,0.2"), None, 0).is_err());
}

#[test]
fn binary_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let spec = d.join("spec.json");
    let st = bin().args(["gen-example", "--out", spec.to_str().unwrap()]).status().unwrap();
    assert!(st.success());
    let frame = d.join("frame.txt");
    let st = bin()
        .args(["encode", spec.to_str().unwrap(), "--seed", "3", "--out", frame.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let mask = write(d, "mask.txt", &write_mask(&example_mask()));
    let erased = d.join("erased.txt");
    let st = bin()
        .args(["erase", frame.to_str().unwrap(), "--pattern", &mask, "--out", erased.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());

    let decoded = d.join("decoded.txt");
    let report = d.join("report.json");
    let out = bin()
        .args(["decode", spec.to_str().unwrap(), erased.to_str().unwrap(), "--delay", "1"])
        .args(["--out", decoded.to_str().unwrap(), "--report", report.to_str().unwrap()])
        .output()
        .unwrap();
    // v_4 and part of v_1 cannot be recovered, so the exit status reports lost symbols.
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(&decoded).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(std::fs::read_to_string(&report).unwrap().contains("\"lost\""));

    let clean = bin().args(["decode", spec.to_str().unwrap(), frame.to_str().unwrap()]).output().unwrap();
    assert_eq!(clean.status.code(), Some(0));
    assert_eq!(String::from_utf8(clean.stdout).unwrap(), std::fs::read_to_string(&frame).unwrap());
}

#[test]
fn binary_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let spec = write(d, "spec.json", &cmd_gen_example().unwrap().artifact);
    let bad = write(d, "bad.txt", "n=5 k=3 gamma=3 field=2^409\n* * 1 2\n");
    let out = bin().args(["decode", &spec, &bad]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2, column 1"), "{err}");
    let binary = d.join("junk.txt");
    std::fs::write(&binary, b"n=5\xff\n").unwrap();
    let out = bin().args(["decode", &spec, binary.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["simulate", &spec, "--trials", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
