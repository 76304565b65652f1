//! End-to-end tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const DUO: &str = r#"{
  "type": "heg",
  "skills": ["python", "java", "sql"],
  "kappa": 2,
  "agents": [
    {"id": "alice", "expertise": [1, 3, 3]},
    {"id": "bob", "expertise": [3, 3, 1]}
  ]
}"#;

const SIX: &str = r#"{
  "type": "heg",
  "skills": ["s1", "s2"],
  "kappa": 3,
  "agents": [
    {"id": "a1", "expertise": [2, 0]},
    {"id": "a2", "expertise": [0, 3]},
    {"id": "a3", "expertise": [1, 1]},
    {"id": "a4", "expertise": [3, 0]},
    {"id": "a5", "expertise": [0, 1]},
    {"id": "a6", "expertise": [2, 2]}
  ]
}"#;

const DECREASING_PAIR: &str = r#"{
  "type": "hgcrp",
  "agents": ["1", "2"],
  "utilities": {"1": 1, "2": 3, "1,2": 2}
}"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("heg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, content: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn heg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heg"))
        .args(args)
        .env_remove("HEG_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_greedy_core_emits_a_partition() {
    let inst = write("duo.json", DUO);
    let out = heg(&["solve", "--method", "greedy-core", "--instance", path_str(&inst)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["coalitions"][0][0], "alice");
    assert_eq!(v["coalitions"][0][1], "bob");
}

#[test]
fn brute_optimal_partition_is_core_stable() {
    let inst = write("six.json", SIX);
    let part = scratch("six-part.json");
    let out = heg(&[
        "solve",
        "--method",
        "brute-optimal",
        "--instance",
        path_str(&inst),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    std::fs::write(&part, stdout(&out)).unwrap();
    let check = heg(&[
        "check",
        "--property",
        "core",
        "--instance",
        path_str(&inst),
        "--partition",
        path_str(&part),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
    let report: serde_json::Value = serde_json::from_str(&stdout(&check)).unwrap();
    assert_eq!(report["holds"], true);
}

#[test]
fn greedy_core_passes_the_scaled_blocking_check() {
    let inst = write("six2.json", SIX);
    let part = scratch("six2-part.json");
    let out = heg(&[
        "solve",
        "--method",
        "greedy-core",
        "--instance",
        path_str(&inst),
    ]);
    assert_eq!(out.status.code(), Some(0));
    std::fs::write(&part, stdout(&out)).unwrap();
    let check = heg(&[
        "check",
        "--property",
        "approx-core",
        "--alpha",
        "0.6321205588",
        "--instance",
        path_str(&inst),
        "--partition",
        path_str(&part),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
}

#[test]
fn failed_property_exits_three_with_a_witness() {
    let inst = write("pair.json", DECREASING_PAIR);
    let part = write("pair-grand.json", r#"{"coalitions": [["1", "2"]]}"#);
    let out = heg(&[
        "check",
        "--property",
        "ns",
        "--instance",
        path_str(&inst),
        "--partition",
        path_str(&part),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["holds"], false);
    assert!(report["witness"].is_object(), "{}", stdout(&out));
}

#[test]
fn brd_writes_a_seeded_trace_and_reaches_stability() {
    let inst = write("six3.json", SIX);
    let part = scratch("six3-part.json");
    let trace = scratch("six3-trace.json");
    let out = heg(&[
        "--seed",
        "11",
        "solve",
        "--method",
        "brd",
        "--instance",
        path_str(&inst),
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    std::fs::write(&part, stdout(&out)).unwrap();
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["seed"], 11);
    assert!(t["steps"].is_array());
    assert!(t["move_bound"].is_number());
    let check = heg(&[
        "check",
        "--property",
        "ns",
        "--instance",
        path_str(&inst),
        "--partition",
        path_str(&part),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
}

#[test]
fn cis_output_passes_its_own_check() {
    let inst = write("six4.json", SIX);
    let part = scratch("six4-part.json");
    let out = heg(&[
        "--seed",
        "4",
        "solve",
        "--method",
        "cis",
        "--instance",
        path_str(&inst),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    std::fs::write(&part, stdout(&out)).unwrap();
    let check = heg(&[
        "check",
        "--property",
        "cis",
        "--instance",
        path_str(&inst),
        "--partition",
        path_str(&part),
    ]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
}

#[test]
fn trace_flag_rejects_traceless_methods() {
    let inst = write("duo2.json", DUO);
    let trace = scratch("duo2-trace.json");
    let out = heg(&[
        "solve",
        "--method",
        "greedy-core",
        "--instance",
        path_str(&inst),
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dynamics_methods_reject_table_games() {
    let inst = write("pair2.json", DECREASING_PAIR);
    let out = heg(&["solve", "--method", "brd", "--instance", path_str(&inst)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("brute-optimal"), "{}", stderr(&out));
}

#[test]
fn brute_optimal_handles_table_games() {
    let inst = write("pair3.json", DECREASING_PAIR);
    let out = heg(&[
        "solve",
        "--method",
        "brute-optimal",
        "--instance",
        path_str(&inst),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // the potential prefers the split where agent 2 keeps utility 3
    assert_eq!(v["coalitions"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_reports_the_worked_example_value() {
    let inst = write("duo3.json", DUO);
    let out = heg(&[
        "oracle",
        "--problem",
        "max-joint-utility",
        "--instance",
        path_str(&inst),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], 9.0);
}

#[test]
fn oracle_pool_restricts_the_scan() {
    let inst = write("duo4.json", DUO);
    let out = heg(&[
        "oracle",
        "--problem",
        "max-joint-utility",
        "--instance",
        path_str(&inst),
        "--pool",
        "alice",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], 7.0);
    assert_eq!(v["members"].as_array().unwrap().len(), 1);
}

#[test]
fn generate_random_is_deterministic_per_seed() {
    let spec = write(
        "rand-spec.json",
        r#"{"agents": 5, "skills": 3, "kappa": 2, "beta": 3, "density": 0.8}"#,
    );
    let a = heg(&["--seed", "42", "generate", "--from", "random", "--spec", path_str(&spec)]);
    let b = heg(&["--seed", "42", "generate", "--from", "random", "--spec", path_str(&spec)]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["type"], "heg");
    assert_eq!(v["agents"].as_array().unwrap().len(), 5);
}

#[test]
fn generate_set_cover_embeds_padding_metadata() {
    let spec = write(
        "cover-spec.json",
        r#"{"m": 4, "sets": [[1, 2], [2, 3], [3, 4]], "k": 2}"#,
    );
    let out = heg(&["generate", "--from", "set-cover", "--spec", path_str(&spec)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["meta"]["padding_agents"].is_array(), "{}", stdout(&out));
    assert_eq!(v["kappa"], 2);
}

#[test]
fn generate_graph_round_trips_through_solve() {
    let spec = write(
        "graph-spec.json",
        r#"{"vertices": ["x", "y", "z"], "edges": [["x", "y", 2.0], ["y", "z", 1.0]], "kappa": 2}"#,
    );
    let out = heg(&["generate", "--from", "hvcg", "--spec", path_str(&spec)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let inst = scratch("graph-inst.json");
    std::fs::write(&inst, stdout(&out)).unwrap();
    let solved = heg(&[
        "solve",
        "--method",
        "greedy-core",
        "--instance",
        path_str(&inst),
    ]);
    assert_eq!(solved.status.code(), Some(0), "{}", stderr(&solved));
}

#[test]
fn malformed_json_reports_position_and_exits_one() {
    let inst = write("broken.json", "{\"type\": \"heg\",\n  \"skills\": [,]}");
    let out = heg(&["solve", "--method", "greedy-core", "--instance", path_str(&inst)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn unknown_flag_exits_one() {
    let out = heg(&["solve", "--nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = heg(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verify-paper"));
}

#[test]
fn alpha_outside_approx_core_is_a_usage_error() {
    let inst = write("duo5.json", DUO);
    let part = write("duo5-part.json", r#"{"coalitions": [["alice", "bob"]]}"#);
    let out = heg(&[
        "check",
        "--property",
        "core",
        "--alpha",
        "0.5",
        "--instance",
        path_str(&inst),
        "--partition",
        path_str(&part),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_subset_of_criteria_passes() {
    let out = heg(&["verify-paper", "--criteria", "1,4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("criterion  1 PASS"), "{text}");
    assert!(text.contains("criterion  4 PASS"), "{text}");
    assert!(text.contains("2/2 criteria passed"), "{text}");
}

#[test]
fn verify_emits_json_outcomes_on_request() {
    let out = heg(&["--json", "verify-paper", "--criteria", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["id"], 1);
    assert_eq!(v[0]["status"], "pass");
}

#[test]
fn tightened_budget_skips_and_exits_two() {
    let out = heg(&["verify-paper", "--criteria", "8", "--subset-budget", "1"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stdout(&out).contains("SKIP"), "{}", stdout(&out));
}

#[test]
fn invalid_criterion_id_is_a_usage_error() {
    let out = heg(&["verify-paper", "--criteria", "12"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_env_var_is_validated() {
    let inst = write("duo6.json", DUO);
    let part = write("duo6-part.json", r#"{"coalitions": [["alice", "bob"]]}"#);
    let bad = Command::new(env!("CARGO_BIN_EXE_heg"))
        .args([
            "check",
            "--property",
            "core",
            "--instance",
            path_str(&inst),
            "--partition",
            path_str(&part),
        ])
        .env("HEG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let good = Command::new(env!("CARGO_BIN_EXE_heg"))
        .args([
            "check",
            "--property",
            "core",
            "--instance",
            path_str(&inst),
            "--partition",
            path_str(&part),
        ])
        .env("HEG_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(good.status.code(), Some(0));
}

#[test]
fn epsilon_bounds_are_enforced() {
    let inst = write("duo7.json", DUO);
    let out = heg(&[
        "solve",
        "--method",
        "greedy-core",
        "--instance",
        path_str(&inst),
        "--epsilon",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("epsilon"), "{}", stderr(&out));
}
