use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn colorlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colorlab"))
        .args(args)
        .env_remove("COLORLAB_NODE_GUARD")
        .output()
        .expect("binary runs")
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).expect("file written")).expect("valid JSON")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn upper_bound_on_a_triangular_grid_wins_every_order() {
    let out = colorlab(&["run-upper", "--family", "tri", "--d", "12", "--k", "3", "--orders", "10", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert_eq!(r["report"]["wins"], 10);
    let games = r["report"]["games"].as_array().unwrap();
    assert_eq!(games.len(), 10);
    for (i, g) in games.iter().enumerate() {
        assert_eq!(g["game"], i);
        assert_eq!(g["verdict"]["outcome"], "algorithm_wins");
        assert!(g["max_type_changes"].as_u64() <= g["type_change_budget"].as_u64());
    }
}

#[test]
fn torus_adversary_reports_a_pair_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("transcript.json");
    let out = colorlab(&[
        "run-adversary",
        "--strategy",
        "torus",
        "--alg",
        "fixed_pattern",
        "--T",
        "1",
        "--side",
        "9",
        "--out",
        transcript.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &stdout_json(&out)["report"];
    assert_eq!(r["certificate_kind"], "torus_pair");
    let (b1, b2) = (r["b_values"]["b1"].as_i64().unwrap(), r["b_values"]["b2"].as_i64().unwrap());
    assert!(b1 % 2 != 0 && b2 % 2 != 0 && (b1 + b2).abs() >= 2);
    let t = json_file(&transcript);
    assert_eq!(t["steps"].as_array().unwrap().len() as u64, r["reveals"].as_u64().unwrap());
    assert_eq!(t["verdict"]["verdict"]["outcome"], "algorithm_loses");
}

#[test]
fn bvalue_suite_has_no_violations() {
    let out = colorlab(&["check-invariants", "--suite", "bvalue"]);
    assert_eq!(out.status.code(), Some(0));
    let lemmas = stdout_json(&out)["report"]["lemmas"].as_array().unwrap().clone();
    let ids: Vec<&str> = lemmas.iter().map(|l| l["lemma_id"].as_str().unwrap()).collect();
    for id in ["grid_cycle_zero", "path_parity", "a_antisymmetry"] {
        assert!(ids.contains(&id), "{ids:?}");
    }
    for l in &lemmas {
        assert_eq!(l["violations"], 0);
        assert!(l["instances_checked"].as_u64().unwrap() > 0);
    }
}

#[test]
fn other_suites_have_no_violations() {
    for suite in ["gadget", "inferable", "layered"] {
        let out = colorlab(&["check-invariants", "--suite", suite]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
    }
}

#[test]
fn identical_invocations_write_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let args = [
        "run-upper", "--family", "ktree", "--k", "2", "--n", "60", "--orders", "4", "--seed", "9", "--out",
        report.to_str().unwrap(),
    ];
    assert_eq!(colorlab(&args).status.code(), Some(0));
    let first = std::fs::read(&report).unwrap();
    assert_eq!(colorlab(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(&report).unwrap());
    let adv = ["run-adversary", "--strategy", "rectangle", "--alg", "greedy_first_fit"];
    assert_eq!(colorlab(&adv).stdout, colorlab(&adv).stdout);
}

#[test]
fn job_count_does_not_change_results() {
    let run = |jobs: &str| {
        let out = colorlab(&["run-upper", "--family", "grid", "--m", "6", "--orders", "5", "--seed", "3", "--jobs", jobs]);
        assert_eq!(out.status.code(), Some(0));
        stdout_json(&out)["report"].clone()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn bad_arguments_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["run-upper", "--family", "grid"],
        &["run-upper", "--family", "grid", "--m", "4", "--k", "3"],
        &["run-upper", "--family", "gadget", "--k", "3", "--nprime", "4"],
        &["run-adversary", "--strategy", "torus", "--alg", "greedy_first_fit", "--side", "10"],
        &["run-adversary", "--strategy", "rectangle", "--alg", "greedy_first_fit", "--k", "8"],
        &["run-adversary", "--strategy", "gadget", "--alg", "unify"],
        &["check-invariants", "--suite", "nope"],
    ] {
        assert_eq!(colorlab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unexpected_outcomes_exit_one() {
    let out = colorlab(&["run-adversary", "--strategy", "torus", "--alg", "unify", "--side", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["expected_outcome"], false);
}

#[test]
fn node_guard_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_colorlab"))
        .args(["run-upper", "--family", "tri", "--d", "4", "--orders", "2"])
        .env("COLORLAB_NODE_GUARD", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["report"]["wins"], 0);
}

#[test]
fn gen_graph_writes_graph_and_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    for (family, extra, nodes) in [
        ("grid", &["--m", "4"][..], 16),
        ("torus", &["--m", "5"], 25),
        ("tri", &["--d", "3"], 10),
        ("ktree", &["--k", "3", "--n", "12"], 12),
        ("gadget", &["--k", "3", "--nprime", "4"], 36),
        ("layered", &["--k", "3", "--m", "3"], 18),
    ] {
        let g = dir.path().join(format!("{family}.json"));
        let mut args = vec!["gen-graph", "--family", family, "--out", g.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(colorlab(&args).status.code(), Some(0), "{family}");
        let graph = json_file(&g);
        assert_eq!(graph["nodes"].as_array().unwrap().len(), nodes, "{family}");
        let coords = json_file(&dir.path().join(format!("{family}.json.coords.json")));
        assert_eq!(coords["nodes"].as_array().unwrap().len(), nodes, "{family}");
    }
}
