use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn frameforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frameforge"))
        .args(args)
        .env_remove("FRAMEFORGE_PRECISION")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn example23_passes_and_corruption_fails_with_witness() {
    let ok = frameforge(&["exp", "example23"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json_of(&ok)["passed"], true);

    let bad = frameforge(&["exp", "example23", "--corrupt", "--seed", "3"]);
    assert_eq!(bad.status.code(), Some(1));
    let r = json_of(&bad);
    let check = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "closed_form").unwrap();
    assert_eq!(check["passed"], false);
    assert!(check["witness"]["vector"].is_array());
}

#[test]
fn reports_are_byte_identical_for_equal_seeds() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = frameforge(&["exp", "incomparable", "--seed", "9", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("id,norm_a,norm_b,ratio"));
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn pipeline_reports_failing_stage() {
    assert_eq!(frameforge(&["exp", "pipeline"]).status.code(), Some(0));

    let dir = tempdir().unwrap();
    let ops = dir.path().join("ops.json");
    // e_2 is never reconstructed
    fs::write(
        &ops,
        r#"[{"domain":"L2","codomain":"L2","terms":[{"f":[[1,1,1]],"x":[[1,1,1]]}]},
            {"domain":"L2","codomain":"L2","terms":[{"f":[[3,1,1]],"x":[[3,1,1]]}]}]"#,
    )
    .unwrap();
    let out = frameforge(&["exp", "pipeline", "--ops", ops.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["checks"][0]["name"], "assemble");
}

#[test]
fn validation_failure_and_config_errors_use_distinct_codes() {
    let out = frameforge(&["nk", "validate", "--sched", "1", "--kmax", "3", "--horizon", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["first_failure"], 1);

    assert_eq!(frameforge(&["nk", "validate", "--sched", "k+1", "--kmax", "6", "--horizon", "20"]).status.code(), Some(0));
    assert_eq!(frameforge(&["frame", "info", "--spec", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(frameforge(&["norm", "eval", "--vec", "1:1", "--mode", "max"]).status.code(), Some(2));

    let env = Command::new(env!("CARGO_BIN_EXE_frameforge"))
        .args(["exp", "example23"])
        .env("FRAMEFORGE_PRECISION", "half")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
}

#[test]
fn norm_eval_matches_known_values() {
    let out = frameforge(&["norm", "eval", "--vec", "5:1", "--sched", "k+1"]);
    assert_eq!(json_of(&out)["value"]["exact"], "256");
    let out = frameforge(&["norm", "eval", "--vec", "1:1,3:1,5:1", "--mode", "min"]);
    // squared: (1 + 1 + 1)^2
    assert_eq!(json_of(&out)["value"]["exact"], "9");

    let float = Command::new(env!("CARGO_BIN_EXE_frameforge"))
        .args(["norm", "eval", "--vec", "1:1/2", "--mode", "min"])
        .env("FRAMEFORGE_PRECISION", "float64")
        .output()
        .unwrap();
    let v = json_of(&float);
    assert!(v["value"].get("exact").is_none());
    assert_eq!(v["value"]["approx"], 0.5);
}

#[test]
fn split_verify_and_assemble_round_trip() {
    let dir = tempdir().unwrap();
    let op = dir.path().join("op.json");
    let sys = dir.path().join("sys.json");
    fs::write(
        &op,
        r#"{"domain":"L2","codomain":"L2","terms":[
            {"f":[[1,1,1],[2,1,2]],"x":[[1,1,1]]},
            {"f":[[2,1,1]],"x":[[1,1,3],[2,1,1]]}]}"#,
    )
    .unwrap();
    let out = frameforge(&["pel", "split", "--op", op.to_str().unwrap(), "--m", "3", "--out", sys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(&sys)["d"], 2);
    assert_eq!(read(&sys)["pairs"].as_array().unwrap().len(), 6);

    let out = frameforge(&["pel", "verify", "--sys", sys.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["exact_equalities"], true);

    let spec = dir.path().join("spec.json");
    let out = frameforge(&["pel", "assemble", "--ops", "coordinate:4", "--rule", "m_k=k", "--out", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let info = frameforge(&["frame", "info", "--spec", spec.to_str().unwrap(), "--horizon", "20"]);
    assert_eq!(info.status.code(), Some(0));
    assert_eq!(json_of(&info)["len"], 10);
}

#[test]
fn compare_writes_side_table() {
    let dir = tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    let csv = dir.path().join("table.csv");
    fs::write(&fam, "[[[1,1,1]],[[3,1,1]],[[5,1,1]]]").unwrap();
    let out = frameforge(&["norm", "compare", "--family", fam.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let w = json_of(&out);
    assert_eq!(w["argmax"], 2);
    assert_eq!(w["strictly_growing"], true);
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 4);
}
