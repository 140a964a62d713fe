use std::path::Path;
use std::sync::OnceLock;

use compartdb::cli::{run, EXIT_NOT_FOUND, EXIT_OK, EXIT_PARSE, EXIT_USAGE};
use tempfile::TempDir;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("compartdb").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn db() -> &'static Path {
    static DB: OnceLock<TempDir> = OnceLock::new();
    DB.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().to_str().unwrap().to_string();
        let (code, out, err) = call(&["--db", &path, "--quiet", "build", "--max-nodes", "3"]);
        assert_eq!(code, EXIT_OK, "{err}");
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["records"], 952);
        dir
    })
    .path()
}

fn db_arg() -> String {
    db().to_str().unwrap().to_string()
}

#[test]
fn generate_two_nodes() {
    let (code, out, _) = call(&["generate", "--nodes", "2", "--out", "-"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 32);
    assert!(out.lines().all(|l| l.starts_with("graph=")));
}

#[test]
fn query_reports_caller_labels() {
    let (code, out, _) = call(&[
        "--db",
        &db_arg(),
        "query",
        "--model",
        "graph=[[],[0]];in=[0];out=[0];leak=[0]",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["params"]["a(1->0)"], "globally");
    assert_eq!(v["params"]["leak(0)"], "globally");
    assert_eq!(v["params"].as_object().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let d = db_arg();
    let (code, _, err) = call(&["--db", &d, "query", "--model", "graph=[[0]];in=[];out=[0];leak=[]"]);
    assert_eq!(code, EXIT_PARSE, "{err}");
    // three inputs are outside the database convention
    let (code, _, _) = call(&[
        "--db",
        &d,
        "query",
        "--model",
        "graph=[[1],[2],[]];in=[0,1,2];out=[2];leak=[]",
    ]);
    assert_eq!(code, EXIT_NOT_FOUND);
    let (code, _, _) = call(&["query", "--bogus"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = call(&["stats"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = call(&["--db", &d, "filter", "--class", "locally", "--all-status", "locally"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("check-conjecture"));
}

#[test]
fn filter_two_node_single_leak() {
    let (code, out, _) = call(&[
        "--db",
        &db_arg(),
        "filter",
        "--nodes",
        "2",
        "--leaks",
        "1",
        "--has-status",
        "globally",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 11);
}

#[test]
fn stats_heatmap_and_conjecture() {
    let d = db_arg();
    let (code, out, _) = call(&["--db", &d, "stats", "--by", "nodes", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "nodes,globally,locally,nonidentifiable\n2,19,3,10\n3,228,137,555\n"
    );
    let tmp = tempfile::tempdir().unwrap();
    let svg = tmp.path().join("all.svg");
    let (code, csv, _) = call(&["--db", &d, "heatmap", "--class", "all", "--out", svg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert_eq!(std::fs::read_to_string(svg.with_extension("csv")).unwrap(), csv);
    let total: usize = csv
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(|v| v.parse::<usize>().unwrap()).collect::<Vec<_>>())
        .sum();
    assert_eq!(total, 952);
    let (code, out, _) = call(&["--db", &d, "check-conjecture", "--max-nodes", "3", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    let (code, out, _) = call(&["--db", &d, "check-conjecture", "--max-nodes", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("0 counterexample"));
    let (code, out, _) = call(&["--db", &d, "edge-report", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(serde_json::from_str::<serde_json::Value>(out.trim()).unwrap().as_array().unwrap().len(), 2);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "--seed",
        "99",
        "assess",
        "--model",
        "graph=[[1],[0,2],[0,1]];in=[0,2];out=[2];leak=[0]",
        "--format",
        "json",
    ];
    let a = call(&args);
    let b = call(&args);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
    let (code, out, _) = call(&["explain", "--model", "graph=[[2],[2],[]];in=[];out=[2];leak=[]", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["params"]["a(0->2)"], "locally");
}
