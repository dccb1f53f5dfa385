//! End-to-end tests of the `nl2spatial` binary: subcommand behavior, exit
//! codes, and output stability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nl2spatial"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process exits normally")
}

#[test]
fn render_symbolic_golden() {
    let out = bin()
        .args(["render", "G[0,20](enclIn(obj_r,reg_s;0.05))", "--symbolic-constants"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    assert_eq!(
        stdout(&out).trim_end(),
        "Throughout [0,20], obj_r lies strictly inside reg_s holds."
    );
}

#[test]
fn render_numeric_surfaces_constants() {
    let out = bin()
        .args(["render", "closeTo(obj_1,obj_2;2)"])
        .output()
        .unwrap();
    assert_eq!(
        stdout(&out).trim_end(),
        "The distance between obj_1 and obj_2 is at most 2."
    );
}

#[test]
fn render_all_nodes_lists_every_subformula() {
    let out = bin()
        .args(["--json", "render", "--all-nodes"])
        .arg(std::fs::read_to_string(fixture("three_clause.spec.txt")).unwrap().trim())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 12);
}

#[test]
fn parse_nl_inverts_render() {
    let rendered = bin()
        .args(["render", "(farFrom(obj_r,obj_b;0.5) U[0,20] touch(obj_r,obj_g;0.05))"])
        .output()
        .unwrap();
    let sentence = stdout(&rendered).trim_end().to_string();
    let out = bin().args(["--json", "parse-nl"]).arg(&sentence).output().unwrap();
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        doc["formula"],
        "(farFrom(obj_r,obj_b;0.5) U[0,20] touch(obj_r,obj_g;0.05))"
    );
}

#[test]
fn parse_nl_rejects_free_form_text() {
    let out = bin()
        .args(["parse-nl", "Put the red block somewhere nice."])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not canonical"));
}

#[test]
fn monitor_satisfied_on_the_touching_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = bin()
        .args(["monitor", "--traj"])
        .arg(fixture("touching_pair.traj.json"))
        .args(["--spec", "touch(obj_1,obj_2;0.1)", "--trace"])
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("1.00000000000e-1"), "{text}");
    assert!(text.contains("SATISFIED"));
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("t,robustness\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn monitor_unsatisfied_exits_3() {
    let out = bin()
        .args(["monitor", "--traj"])
        .arg(fixture("touching_pair.traj.json"))
        .args(["--spec", "closeTo(obj_1,obj_2;1)"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3);
    assert!(stdout(&out).contains("NOT SATISFIED"));
}

#[test]
fn monitor_missing_file_exits_2() {
    let out = bin()
        .args(["monitor", "--traj", "/nonexistent.json", "--spec", "touch(obj_1,obj_2;0.1)"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["monitor", "--bogus"]).output().unwrap();
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn gen_dataset_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.jsonl");
    let second = dir.path().join("b.jsonl");
    for path in [&first, &second] {
        let out = bin()
            .args(["--json", "gen-dataset", "--n", "5", "--seed", "7", "--out"])
            .arg(path)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(summary["records"], 5);
        assert_eq!(summary["seed"], 7);
    }
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().filter(|c| **c == b'\n').count(), 5);
}

#[test]
fn gen_dataset_accepts_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"d_max": 3, "b_max": 2, "seed": 11, "paraphrase_k": 1}"#).unwrap();
    let out_path = dir.path().join("c.jsonl");
    let out = bin()
        .args(["gen-dataset", "--spec"])
        .arg(&spec)
        .args(["--n", "3", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(&out_path).unwrap();
    for line in body.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["seed"], 11);
        assert_eq!(record["paraphrases"].as_array().unwrap().len(), 1);
    }
}

#[test]
fn select_rollout_picks_the_best_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces.csv");
    let out = bin()
        .args(["select-rollout", "--spec", "closeTo(obj_1,obj_2;2)", "--rollouts"])
        .args([
            fixture("rollout_far.traj.json"),
            fixture("rollout_mid.traj.json"),
            fixture("rollout_near.traj.json"),
        ])
        .arg("--traces")
        .arg(&traces)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("winner: candidate 2"));
    let csv = std::fs::read_to_string(&traces).unwrap();
    assert!(csv.starts_with("candidate,t,robustness\n"));
    assert_eq!(csv.lines().count(), 1 + 9);
}

#[test]
fn select_rollout_exits_3_when_even_the_best_fails() {
    let out = bin()
        .args(["--json", "select-rollout", "--spec", "closeTo(obj_1,obj_2;2)", "--rollouts"])
        .arg(fixture("rollout_far.traj.json"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["winner"], 0);
    assert_eq!(doc["satisfied"], false);
}

#[test]
fn compose_hlt_flattens_the_shipped_tree() {
    let out = bin()
        .args(["compose-hlt", "--hlt"])
        .arg(fixture("block_sorting.hlt.json"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let expected = std::fs::read_to_string(fixture("three_clause.spec.txt")).unwrap();
    assert_eq!(stdout(&out).trim_end(), expected.trim_end());
}

#[test]
fn expand_hlt_replays_to_the_shipped_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("expanded.hlt.json");
    let out = bin()
        .args(["--json", "expand-hlt", "--replay"])
        .arg(fixture("block_sorting.hlt.json"))
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["nodes"], 12);
    assert_eq!(doc["rounds"], 3);
    let produced = std::fs::read_to_string(&out_path).unwrap();
    let shipped = std::fs::read_to_string(fixture("block_sorting.hlt.json")).unwrap();
    assert_eq!(produced, shipped);
}

#[test]
fn version_names_the_dataset_schema() {
    let out = bin().arg("--version").output().unwrap();
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("dataset schema v1"));
}
