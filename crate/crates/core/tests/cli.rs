use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn portgnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_portgnn")).args(args).output().expect("spawn portgnn")
}

fn ok(args: &[&str]) -> String {
    let out = portgnn(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn gen_writes_headed_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let star = dir.path().join("star.json");
    ok(&["gen", "star", "3", "-o", p(&star)]);
    let v = json(&star);
    assert_eq!(v["n"], 4);
    assert_eq!(v["edges"].as_array().unwrap().len(), 3);
    assert_eq!(v["header"]["tool"], "portgnn");
    assert_eq!(v["header"]["spec_hash"].as_str().unwrap().len(), 64);

    let cycle: Value = serde_json::from_str(&ok(&["gen", "cycle", "6"])).unwrap();
    assert_eq!(cycle["n"], 6);
    assert_eq!(cycle["edges"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(portgnn(&["gen", "star", "0"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    ok(&["gen", "star", "3", "-o", p(&g)]);
    assert_eq!(portgnn(&["simulate", p(&g), "no_such_program"]).status.code(), Some(2));
}

#[test]
fn single_leaf_program_passes_under_shuffled_ports() {
    let dir = tempfile::tempdir().unwrap();
    for k in [2, 3, 5] {
        let g = dir.path().join(format!("star{k}.json"));
        ok(&["gen", "star", &k.to_string(), "-o", p(&g)]);
        for seed in 0..10 {
            let out = dir.path().join("labels.json");
            let ports = format!("shuffle:{seed}");
            ok(&["simulate", p(&g), "single_leaf", "--ports", &ports, "-o", p(&out)]);
            let labels: Vec<u64> = json(&out)["labels"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap())
                .collect();
            assert_eq!(labels.len(), k + 1);
            assert_eq!(labels[0], 0, "center must be labeled 0");
            assert_eq!(labels.iter().sum::<u64>(), 1, "exactly one leaf labeled 1: {labels:?}");
        }
    }
}

#[test]
fn identity_program_reports_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("c6.json");
    ok(&["gen", "cycle", "6", "-o", p(&g)]);
    let v: Value = serde_json::from_str(&ok(&["simulate", p(&g), "identity"])).unwrap();
    assert_eq!(v["labels"], serde_json::json!([2, 2, 2, 2, 2, 2]));
}

#[test]
fn oracle_reports_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("s.json");
    ok(&["gen", "star", "4", "-o", p(&g)]);
    let cover: Value = serde_json::from_str(&ok(&["oracle", p(&g), "--problem", "mvc"])).unwrap();
    assert_eq!(cover["size"], 1);
    assert_eq!(cover["nodes"], serde_json::json!([1]));
    let g = dir.path().join("p.json");
    ok(&["gen", "path", "5", "-o", p(&g)]);
    let dom: Value = serde_json::from_str(&ok(&["oracle", p(&g), "--problem", "mds"])).unwrap();
    assert_eq!(dom["size"], 2);
}

#[test]
fn singleleaf_bundle_is_well_formed_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--trials", "1", "--iterations", "3", "--curve-every", "1"];
    for dir in [&a, &b] {
        let mut full = vec!["exp", "singleleaf", "--out", p(dir.path())];
        full.extend_from_slice(&args);
        ok(&full);
    }
    for name in ["singleleaf_report.json", "singleleaf_rewards.csv", "singleleaf_summary.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let summary = std::fs::read_to_string(a.path().join("singleleaf_summary.csv")).unwrap();
    assert!(summary.starts_with("# "));
    let rows = data_rows(&summary);
    let kinds: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(kinds, ["vvc", "mb", "sb"]);
    assert!(rows.iter().all(|r| r[2] == "1"));
    let rewards = std::fs::read_to_string(a.path().join("singleleaf_rewards.csv")).unwrap();
    assert!(rewards.lines().any(|l| l == "kind,trial,iteration,mean_reward"));
    assert!(!data_rows(&rewards).is_empty());
    let report = json(&a.path().join("singleleaf_report.json"));
    assert!(report["header"]["spec_hash"].is_string());
}

#[test]
fn ratios_on_stars_match_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["exp", "ratios", "--out", p(dir.path()), "--family", "star:2-8"]);
    let csv = std::fs::read_to_string(dir.path().join("ratios.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 7);
    for (row, k) in rows.iter().zip(2usize..) {
        assert_eq!(row.len(), 15);
        assert_eq!(row[3], (k + 1).to_string());
        assert_eq!(row[6], "1");
        assert_eq!(row[8], (k + 1).to_string(), "all-nodes dominating set on a star is k+1 times optimal");
        assert_eq!(row[9], "1");
        assert_eq!(row[11], "2");
        assert_eq!(row[14], "1");
    }
}

#[test]
fn empty_family_list_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = portgnn(&["exp", "ratios", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("ratios.csv")).unwrap();
    assert!(data_rows(&csv).is_empty());
    assert!(csv.lines().any(|l| l.starts_with("family,index,seed,")));
}
