use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multicut::embedding::{chimera_graph, validate_embedding, Embedding, LogicalGraph};
use multicut::instance::parse_instance;
use multicut::solvers::exact_bruteforce;
use multicut::{Qubo, TreeInstance};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multicut"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str]) -> Output {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    o
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn three_path_file(dir: &TempDir) -> PathBuf {
    let inst = TreeInstance::new(3, vec![(0, 1), (1, 2)], vec![(0, 2)], 0).unwrap();
    let p = path(dir, "path3.json");
    fs::write(&p, inst.to_json()).unwrap();
    p
}

fn slack_qubo_file(dir: &TempDir) -> PathBuf {
    let inst = three_path_file(dir);
    let q = path(dir, "path3.qubo");
    ok(&["build", s(&inst), "--encoding", "slack", "-o", s(&q)]);
    q
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_writes_a_valid_reproducible_instance() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    ok(&["gen", "--n", "24", "--k", "3", "--seed", "1", "-o", s(&a)]);
    ok(&["gen", "--n", "24", "--k", "3", "--seed", "1", "-o", s(&b)]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let inst = parse_instance(&text).unwrap();
    assert_eq!((inst.num_vertices(), inst.terminal_pairs().len()), (24, 3));
}

#[test]
fn gen_rejects_tiny_trees() {
    let o = run(&["gen", "--n", "2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n must be ≥ 3"), "{}", stderr(&o));
}

#[test]
fn unknown_flags_and_encodings_are_usage_errors() {
    assert_eq!(run(&["gen", "--n", "5", "--k", "1", "--bogus"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let inst = three_path_file(&dir);
    assert_eq!(run(&["build", s(&inst), "--encoding", "quartic"]).status.code(), Some(2));
}

#[test]
fn build_slack_has_three_variables() {
    let dir = TempDir::new().unwrap();
    let q = slack_qubo_file(&dir);
    let qubo = Qubo::<f64>::from_text(&fs::read_to_string(&q).unwrap()).unwrap();
    assert_eq!(qubo.num_vars(), 3);
    assert!(path(&dir, "path3.qubo.labels").exists());
}

#[test]
fn build_literal_optimum_is_22() {
    let dir = TempDir::new().unwrap();
    let inst = three_path_file(&dir);
    let q = path(&dir, "lit.qubo");
    ok(&["build", s(&inst), "--encoding", "literal", "--m1", "10", "--m2", "10", "-o", s(&q)]);
    let qubo = Qubo::<f64>::from_text(&fs::read_to_string(&q).unwrap()).unwrap();
    assert_eq!(exact_bruteforce(&qubo).unwrap().1, 22.0);
}

#[test]
fn solve_exact_and_sa_determinism() {
    let dir = TempDir::new().unwrap();
    let q = slack_qubo_file(&dir);
    let out = path(&dir, "exact.json");
    ok(&["solve", s(&q), "--solver", "exact", "-o", s(&out)]);
    let v = read_json(&out);
    assert_eq!(v["records"][0]["energy"].as_f64(), Some(1.0), "{v}");

    let a = ok(&["solve", s(&q), "--solver", "sa", "--seed", "5"]).stdout;
    let b = ok(&["solve", s(&q), "--solver", "sa", "--seed", "5"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn exact_refuses_thirty_variables() {
    let dir = TempDir::new().unwrap();
    let linear: BTreeMap<usize, f64> = (0..30).map(|i| (i, 1.0)).collect();
    let q = Qubo::unlabeled(30, linear, BTreeMap::new(), 0.0).unwrap();
    let p = path(&dir, "big.qubo");
    fs::write(&p, q.to_text()).unwrap();
    let o = run(&["solve", s(&p), "--solver", "exact"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("exceeds brute-force limit"), "{}", stderr(&o));
}

#[test]
fn pipeline_reports_chain_stats() {
    let dir = TempDir::new().unwrap();
    let q = slack_qubo_file(&dir);
    let (out, stats) = (path(&dir, "out.json"), path(&dir, "stats.json"));
    ok(&[
        "pipeline", s(&q), "--chimera", "2", "2", "4", "--stats", s(&stats), "-o", s(&out),
    ]);
    let st = read_json(&stats);
    assert!(st["overhead_ratio"].as_f64().unwrap() >= 1.0, "{st}");
    assert!(st["chain_strength"].as_f64().unwrap() > 0.0);
    let v = read_json(&out);
    assert_eq!(v["records"][0]["energy"].as_f64(), Some(1.0), "{v}");
}

#[test]
fn embed_output_validates() {
    let dir = TempDir::new().unwrap();
    let q = slack_qubo_file(&dir);
    let out = path(&dir, "emb.json");
    ok(&["embed", s(&q), "--chimera", "2", "2", "4", "-o", s(&out)]);
    let emb = Embedding::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let qubo = Qubo::<f64>::from_text(&fs::read_to_string(&q).unwrap()).unwrap();
    let lg = LogicalGraph::new(qubo.num_vars(), qubo.interactions());
    assert!(validate_embedding(&lg, &chimera_graph(2, 2, 4).unwrap(), &emb).is_valid());
}

#[test]
fn k6_pipeline_fails_to_embed() {
    let dir = TempDir::new().unwrap();
    let mut quad = BTreeMap::new();
    for a in 0..6 {
        for b in a + 1..6 {
            quad.insert((a, b), 1.0);
        }
    }
    let q = Qubo::unlabeled(6, BTreeMap::new(), quad, 0.0).unwrap();
    let p = path(&dir, "k6.qubo");
    fs::write(&p, q.to_text()).unwrap();
    let o = run(&["pipeline", s(&p), "--chimera", "1", "1", "4"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("embedding failed"), "{}", stderr(&o));
}

#[test]
fn bench_default_is_nine_rows_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    ok(&["bench", "--no-timing", "-o", s(&a)]);
    ok(&["bench", "--no-timing", "-o", s(&b)]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn bench_runs_both_encodings_and_reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let spec = path(&dir, "spec.json");
    fs::write(
        &spec,
        r#"{"suite":[{"vertices":12,"pairs":2,"seed":3}],"encodings":["slack","literal"]}"#,
    )
    .unwrap();
    let json = path(&dir, "records.json");
    ok(&["bench", s(&spec), "--format", "json", "-o", s(&json)]);
    let records = read_json(&json);
    let encodings: Vec<&str> = records
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["encoding"].as_str().unwrap())
        .collect();
    assert_eq!(encodings, ["slack", "literal"]);
    let csv = ok(&["report", s(&json), "--format", "csv"]).stdout;
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
}

#[test]
fn malformed_spec_names_the_field() {
    let dir = TempDir::new().unwrap();
    let spec = path(&dir, "bad.json");
    fs::write(&spec, r#"{"repetitions": 0}"#).unwrap();
    let o = run(&["bench", s(&spec)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("repetitions"), "{}", stderr(&o));

    fs::write(&spec, r#"{"solverz": []}"#).unwrap();
    let o = run(&["bench", s(&spec)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("solverz"), "{}", stderr(&o));
}
