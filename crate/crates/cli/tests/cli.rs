use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kbroadcast::solver::is_dominating;
use kbroadcast::{Graph, Witness};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbroadcast"))
        .args(args)
        .env("KBROADCAST_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", s(&out)]);
    assert!(run(&full).status.success());
    out
}

#[test]
fn solve_path_and_extremal_tree() {
    let dir = TempDir::new().unwrap();
    let p7 = gen(&dir, "p7.txt", &["--family", "path", "--n", "7"]);
    let o = run(&["solve", "--graph", s(&p7), "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n");
    let o = run(&["solve", "--graph", s(&p7), "--k", "2", "--method", "oracle"]);
    assert_eq!(stdout(&o), "3\n");

    let t3 = gen(&dir, "t3.txt", &["--family", "tk", "--k", "3"]);
    let w = dir.path().join("w.json");
    let o = run(&["solve", "--graph", s(&t3), "--k", "3", "--witness", s(&w)]);
    assert_eq!(stdout(&o), "5\n");
    let g = Graph::from_edge_list(&std::fs::read_to_string(&t3).unwrap()).unwrap();
    assert_eq!(g.order(), 12);
    let witness = Witness::from_json(&std::fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!((witness.k, witness.value), (3, 5));
    assert!(is_dominating(&g, &witness.to_broadcast(12).unwrap()).unwrap());
}

#[test]
fn solve_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let disconnected = file(&dir, "d.txt", "4 2\n0 1\n2 3\n");
    assert_eq!(run(&["solve", "--graph", s(&disconnected), "--k", "2"]).status.code(), Some(2));
    let garbage = file(&dir, "g.txt", "3 1\n0 x\n");
    let o = run(&["solve", "--graph", s(&garbage), "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let missing = dir.path().join("nope.txt");
    assert_eq!(run(&["solve", "--graph", s(&missing), "--k", "1"]).status.code(), Some(2));
    let p3 = file(&dir, "p3.txt", "3 2\n0 1\n1 2\n");
    assert_eq!(run(&["solve", "--graph", s(&p3), "--k", "0"]).status.code(), Some(2));
}

#[test]
fn solve_guard_exit_code() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "p30.txt", &["--family", "path", "--n", "30"]);
    let o = run(&["solve", "--graph", s(&p), "--k", "2", "--max-nodes", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("upper bound"));
    let big = gen(&dir, "p20.txt", &["--family", "path", "--n", "20"]);
    let o = run(&["solve", "--graph", s(&big), "--k", "2", "--method", "oracle"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_families() {
    let dir = TempDir::new().unwrap();
    let p9 = gen(&dir, "p9.txt", &["--family", "path", "--n", "9"]);
    let g = Graph::from_edge_list(&std::fs::read_to_string(&p9).unwrap()).unwrap();
    assert_eq!(g, Graph::path(9));

    let a = gen(&dir, "a.txt", &["--family", "random-tree", "--n", "10", "--seed", "7"]);
    let b = gen(&dir, "b.txt", &["--family", "random-tree", "--n", "10", "--seed", "7"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = run(&["gen", "--family", "spider", "--legs", "3,3,3"]);
    let spider = Graph::from_edge_list(&stdout(&o)).unwrap();
    assert_eq!((spider.order(), spider.degree(0)), (10, 3));

    assert_eq!(run(&["gen", "--family", "tk", "--k", "2"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--family", "path"]).status.code(), Some(2));
}

#[test]
fn reduce_outputs() {
    let dir = TempDir::new().unwrap();
    let cnf = file(&dir, "f.cnf", "c two clauses\np cnf 3 2\n1 -2 3 0\n-1 2 -3 0\n");
    let out = dir.path().join("g.txt");
    let o = run(&["reduce", "--cnf", s(&cnf), "--k", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("threshold 9"));
    let g = Graph::from_edge_list(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((g.order(), g.size()), (39, 46));
    let roles: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.roles.json")).unwrap()).unwrap();
    assert_eq!(roles[0], serde_json::json!({"vertex": 0, "role": "u_1"}));
    assert_eq!(roles.as_array().unwrap().len(), 39);

    let empty = file(&dir, "e.cnf", "p cnf 1 0\n");
    let out = dir.path().join("e.txt");
    let o = run(&["reduce", "--cnf", s(&empty), "--k", "3", "--out", s(&out)]);
    assert!(stdout(&o).contains("threshold 3"));
    let g = Graph::from_edge_list(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g.order(), 11);

    let short = file(&dir, "s.cnf", "p cnf 2 1\n1 2 0\n");
    let o = run(&["reduce", "--cnf", s(&short), "--k", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audits() {
    let dir = TempDir::new().unwrap();
    let o = run(&["audit", "--trees", "--max-n", "12", "--k", "3", "--format", "table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0 violations, 1 tight"));
    assert!(text.lines().any(|l| l.contains("tight") && l.trim_start().starts_with("12")));

    let o = run(&["audit", "--trees", "--max-n", "12", "--k", "3"]);
    let last = stdout(&o).lines().last().unwrap().to_string();
    let summary: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(summary["summary"]["violations"], 0);

    let o = run(&["audit", "--trees", "--max-n", "8", "--k", "7", "--format", "table"]);
    assert!(stdout(&o).contains("0 instances"));

    let p9 = gen(&dir, "p9.txt", &["--family", "path", "--n", "9"]);
    let o = run(&["audit", "--chain", "--graph", s(&p9), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let chain: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(chain["chain"], serde_json::json!([3, 3, 3, 3]));
    assert_eq!(chain["monotone"], true);

    assert_eq!(run(&["audit", "--trees", "--max-n", "17", "--k", "3"]).status.code(), Some(3));
    assert_ne!(run(&["audit"]).status.code(), Some(0));
}

#[test]
fn spanning_reports() {
    let dir = TempDir::new().unwrap();
    let c6 = file(&dir, "c6.txt", &Graph::cycle(6).to_edge_list());
    let o = run(&["spanning", "--graph", s(&c6), "--k", "2", "--format", "table"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "graph 2, trees 2, equal\n");
    let o = run(&["spanning", "--graph", s(&c6), "--k", "2"]);
    assert_eq!(stdout(&o), "{\"graph_value\":2,\"tree_min\":2,\"equal\":true}\n");

    let tree = gen(&dir, "t.txt", &["--family", "random-tree", "--n", "9", "--seed", "3"]);
    let o = run(&["spanning", "--graph", s(&tree), "--k", "3", "--format", "json"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["equal"], true);

    let k4 = file(&dir, "k4.txt", &Graph::complete(4).to_edge_list());
    let h = dir.path().join("h.txt");
    let min_tree = dir.path().join("min.txt");
    let o = run(&[
        "spanning", "--graph", s(&k4), "--k", "3", "--extract", s(&h), "--tree", s(&min_tree),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let h = Graph::from_edge_list(&std::fs::read_to_string(&h).unwrap()).unwrap();
    assert!(h.is_tree() && h.order() == 4);
    let f = kbroadcast::gamma_bk(&Graph::complete(4), 3).unwrap().witness;
    assert!(is_dominating(&h, &f).unwrap());
    assert!(Graph::from_edge_list(&std::fs::read_to_string(&min_tree).unwrap()).unwrap().is_tree());

    let o = run(&["spanning", "--graph", s(&k4), "--k", "3", "--max-trees", "10"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["spanning", "--graph", s(&k4), "--k", "2", "--extract", s(&dir.path().join("x.txt"))]);
    assert_eq!(o.status.code(), Some(2));
}
