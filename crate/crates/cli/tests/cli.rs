use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn itpack(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itpack")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn edge_free(dir: &Path) {
    let out = itpack(&["gen", "random", "--k", "3", "--n", "4", "--max-deg", "0", "--local", "0", "-o", "e.json"], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

const PACK: &[&str] = &["pack", "e.json", "--mode", "practical", "--p", "0.5", "--rounds", "4", "--iters", "6", "--seed", "1"];

#[test]
fn extremal_instance_has_no_transversal() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&itpack(&["gen", "cliques-extremal", "--n", "2", "-o", "g.json"], dir.path())), 0);
    let out = itpack(&["oracle", "exists", "g.json"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("no transversal"));
}

#[test]
fn edge_free_pack_is_complete_and_validates() {
    let dir = TempDir::new().unwrap();
    edge_free(dir.path());
    let out = itpack(&[PACK, &["-o", "p.json", "--trace", "t.csv"]].concat(), dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let packing = json(dir.path().join("p.json"));
    assert_eq!(packing["format"], "itpack-packing/1");
    assert_eq!(packing["seed"], 1);
    assert_eq!(packing["config"]["p"], 0.5);
    assert_eq!(packing["transversals"].as_array().unwrap().len(), 4);
    let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(trace.starts_with("r,t,active_transversals,min_candidate,max_candidate,s_minus,s_plus,d_bound,"));
    assert_eq!(code(&itpack(&["validate", "e.json", "p.json"], dir.path())), 0);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&itpack(&["gen", "random", "--k", "6", "--n", "20", "--max-deg", "6", "--local", "2", "-o", "e.json"], dir.path())), 0);
    for (file, workers) in [("a.json", "1"), ("b.json", "1"), ("c.json", "3")] {
        assert!(code(&itpack(&[PACK, &["-o", file, "--workers", workers]].concat(), dir.path())) != 2);
    }
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("a.json"), read("c.json"));
}

#[test]
fn tampered_packing_fails_validation() {
    let dir = TempDir::new().unwrap();
    edge_free(dir.path());
    assert_eq!(code(&itpack(&[PACK, &["-o", "p.json"]].concat(), dir.path())), 0);
    let mut packing = json(dir.path().join("p.json"));
    let first = packing["transversals"][0].clone();
    packing["transversals"][1] = first;
    std::fs::write(dir.path().join("bad.json"), packing.to_string()).unwrap();
    let out = itpack(&["validate", "e.json", "bad.json"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("disjoint"));
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{\"k\": 2}").unwrap();
    assert_eq!(code(&itpack(&["pack", "broken.json"], dir.path())), 2);
    assert_eq!(code(&itpack(&["pack", "missing.json"], dir.path())), 2);
    edge_free(dir.path());
    assert_eq!(code(&itpack(&["pack", "e.json", "--mode", "theory", "--p", "0.3"], dir.path())), 2);
    assert_eq!(code(&itpack(&["pack", "e.json", "--eps", "1.5"], dir.path())), 2);
}

#[test]
fn infeasible_pack_writes_partial_result() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&itpack(&["gen", "cliques-extremal", "--n", "3", "-o", "g.json"], dir.path())), 0);
    let out = itpack(&["pack", "g.json", "--p", "0.5", "-o", "p.json"], dir.path());
    assert_eq!(code(&out), 3);
    let packing = json(dir.path().join("p.json"));
    assert_eq!(packing["complete"], false);
    assert!(packing["transversals"].as_array().unwrap().is_empty());
}

#[test]
fn reduce_pack_output_validates() {
    let dir = TempDir::new().unwrap();
    let gen = ["gen", "random", "--k", "4", "--n", "32", "--max-deg", "12", "--local", "4", "--seed", "3", "-o", "g.json"];
    assert_eq!(code(&itpack(&gen, dir.path())), 0);
    let out = itpack(&["reduce-pack", "g.json", "--eps", "0.5", "--gamma", "0.25", "-o", "p.json"], dir.path());
    assert!(matches!(code(&out), 0 | 3), "{}", String::from_utf8_lossy(&out.stderr));
    let packing = json(dir.path().join("p.json"));
    assert_eq!(packing["command"], "reduce-pack");
    assert_eq!(packing["plan"]["case"], "halve_then_split");
    assert_eq!(code(&itpack(&["validate", "g.json", "p.json"], dir.path())), 0);
}

#[test]
fn clique_pack_on_complete_tripartite() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&itpack(&["gen", "complete", "--k", "3", "--n", "2", "-o", "g.json"], dir.path())), 0);
    assert_eq!(code(&itpack(&["clique-pack", "g.json", "-o", "c.json"], dir.path())), 0);
    let cliques = json(dir.path().join("c.json"));
    assert_eq!(cliques["format"], "itpack-cliques/1");
    assert_eq!(cliques["cliques"].as_array().unwrap().len(), 2);
}

#[test]
fn list_colorings() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("edge.json"), r#"{"n": 2, "edges": [[0, 1]], "lists": [[1, 2], [1, 2]]}"#).unwrap();
    assert_eq!(code(&itpack(&["list-color", "edge.json", "-o", "c.json"], dir.path())), 0);
    assert_eq!(json(dir.path().join("c.json"))["colorings"].as_array().unwrap().len(), 2);
    let triangle = r#"{"n": 3, "edges": [[0, 1], [1, 2], [0, 2]], "lists": [[1, 2], [1, 2], [1, 2]]}"#;
    std::fs::write(dir.path().join("tri.json"), triangle).unwrap();
    assert_eq!(code(&itpack(&["list-color", "tri.json", "-o", "t.json"], dir.path())), 3);
    assert!(json(dir.path().join("t.json"))["colorings"].as_array().unwrap().is_empty());
}

#[test]
fn oracle_max_counts_edge_free_parts() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&itpack(&["gen", "random", "--k", "2", "--n", "2", "--max-deg", "0", "--local", "0", "-o", "g.json"], dir.path())), 0);
    assert_eq!(code(&itpack(&["oracle", "max", "g.json", "-o", "m.json"], dir.path())), 0);
    assert_eq!(json(dir.path().join("m.json"))["count"], 2);
}

#[test]
fn schedule_check_reports_clauses() {
    let dir = TempDir::new().unwrap();
    let out = itpack(&["schedule", "check", "--eps", "0.005", "--n", "1000000000", "--json"], dir.path());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let ii = report["clauses"].as_array().unwrap().iter().find(|c| c["clause"] == "ii").unwrap();
    assert_eq!(ii["passed"], true);
    let text = itpack(&["schedule", "check", "--eps", "0.1", "--n", "1000000000"], dir.path());
    assert_eq!(code(&text), 3);
    assert!(String::from_utf8_lossy(&text.stdout).contains("clause (ii): FAIL"));
}
