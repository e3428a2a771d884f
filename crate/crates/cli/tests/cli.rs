use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use annlayout::adapter::read_fixed;
use annlayout::dataset_io::read_ivecs;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_annlayout"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn annlayout")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Synthetic 200 x 8 database, 20 queries, exact 16-NN graph.
fn fixture(dir: &Path) {
    ok(&[
        "synth", "--n", "200", "--d", "8", "--seed", "3", "--query-seed", "4", "--n-queries", "20",
        "--out-base", &p(dir, "base.fvecs"), "--out-queries", &p(dir, "q.fvecs"),
    ]);
    ok(&[
        "build", "--base", &p(dir, "base.fvecs"), "--builder", "exact", "--k-max", "16",
        "--out", &p(dir, "g.fdg"),
    ]);
}

#[test]
fn ground_truth_then_exhaustive_search_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    ok(&["gt", "--base", &p(d, "base.fvecs"), "--queries", &p(d, "q.fvecs"), "--k", "10", "--out", &p(d, "gt.ivecs")]);
    ok(&[
        "--workers", "2", "search", "--graph", &p(d, "g.fdg"), "--base", &p(d, "base.fvecs"),
        "--queries", &p(d, "q.fvecs"), "--l", "200", "--k", "10", "--out", &p(d, "res.json"),
    ]);
    let gt = read_ivecs(d.join("gt.ivecs")).unwrap();
    let res: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("res.json")).unwrap()).unwrap();
    let results = res["results"].as_array().unwrap();
    assert_eq!(results.len(), 20);
    for (q, r) in results.iter().enumerate() {
        let ids: Vec<i32> = r["ids"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap() as i32).collect();
        assert_eq!(ids, gt.row(q), "query {q}");
    }
    for out in ["gt.ivecs", "res.json", "g.fdg", "base.fvecs"] {
        assert!(d.join(format!("{out}.manifest.json")).exists(), "{out}");
    }
}

#[test]
fn identity_reorder_preserves_edges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    ok(&[
        "reorder", "--graph", &p(d, "g.fdg"), "--algo", "identity", "--out-perm", &p(d, "id.perm"),
        "--out-graph", &p(d, "id.fdg"),
    ]);
    let a = read_fixed(d.join("g.fdg")).unwrap();
    let b = read_fixed(d.join("id.fdg")).unwrap();
    let mut ea: Vec<(u32, u32)> = a.edges().collect();
    let mut eb: Vec<(u32, u32)> = b.edges().collect();
    ea.sort_unstable();
    eb.sort_unstable();
    assert_eq!(ea, eb);
}

#[test]
fn reorder_with_dataset_keeps_search_results() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    ok(&[
        "reorder", "--graph", &p(d, "g.fdg"), "--algo", "gorder", "--out-perm", &p(d, "go.perm"),
        "--out-graph", &p(d, "go.fdg"), "--base", &p(d, "base.fvecs"), "--out-base", &p(d, "go.fvecs"),
    ]);
    let search = |graph: &str, base: &str, entry: &str, out: &str| {
        ok(&[
            "search", "--graph", &p(d, graph), "--base", &p(d, base), "--queries", &p(d, "q.fvecs"),
            "--l", "20", "--k", "10", "--entry", entry, "--out", &p(d, out),
        ]);
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join(out)).unwrap()).unwrap();
        v["results"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["distances"].clone())
            .collect::<Vec<_>>()
    };
    let perm = annlayout::reorder::read_perm(d.join("go.perm")).unwrap();
    let mapped = perm.apply(7).to_string();
    assert_eq!(search("g.fdg", "base.fvecs", "7", "a.json"), search("go.fdg", "go.fvecs", &mapped, "b.json"));
}

fn bench_config(d: &Path, extra: &str) -> PathBuf {
    let cfg = format!(
        r#"
output_dir = "{out}"
graph = "{graph}"
trials = 1
{extra}
[dataset]
path = "{base}"
format = "fvecs"
metric = "l2"
[queries]
path = "{q}"
format = "fvecs"
[[reorders]]
algorithm = "gorder"
[[reorders]]
algorithm = "rcm"
"#,
        out = p(d, "bench"),
        graph = p(d, "g.fdg"),
        base = p(d, "base.fvecs"),
        q = p(d, "q.fvecs"),
    );
    let path = d.join("bench.toml");
    std::fs::write(&path, cfg).unwrap();
    path
}

#[test]
fn bench_emits_sixteen_records_per_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    let cfg = bench_config(d, "");
    ok(&["bench", "--config", cfg.to_str().unwrap()]);
    let csv = std::fs::read_to_string(d.join("bench/records.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("index,dataset,reorder,L,k,recall,qps,qps_std,speedup,trials"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16 * 3);
    for layout in ["baseline", "gorder", "rcm"] {
        assert_eq!(rows.iter().filter(|r| r.split(',').nth(2) == Some(layout)).count(), 16);
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("bench/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["resolved_config"]["trials"], 1);
    assert_eq!(manifest["resolved_config"]["seed"], 0);
    assert_eq!(manifest["outputs"]["speedup_pairing"], "equal-L");

    // flags override the file
    ok(&["bench", "--config", cfg.to_str().unwrap(), "--l-grid", "20,40", "--reorder", "rcm", "--out-dir", &p(d, "b2")]);
    let rows = std::fs::read_to_string(d.join("b2/records.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 2 * 2);
}

#[test]
fn replay_reproduces_search_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    ok(&[
        "search", "--graph", &p(d, "g.fdg"), "--base", &p(d, "base.fvecs"), "--queries", &p(d, "q.fvecs"),
        "--l", "30", "--k", "5", "--random-entries", "3", "--seed", "9", "--out", &p(d, "r.json"),
    ]);
    let first = std::fs::read(d.join("r.json")).unwrap();
    std::fs::remove_file(d.join("r.json")).unwrap();
    ok(&["replay", "--manifest", &p(d, "r.json.manifest.json")]);
    assert_eq!(std::fs::read(d.join("r.json")).unwrap(), first);
}

fn error_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(s.trim_end().lines().count(), 1, "{s}");
    s
}

#[test]
fn errors_are_single_line_with_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);

    let out = run(&["analyze", "--graph", &p(d, "g.fdg"), "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).starts_with("error kind=usage msg="));

    std::fs::write(d.join("bad.toml"), "output_dir = [").unwrap();
    let out = run(&["bench", "--config", &p(d, "bad.toml")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(error_line(&out).starts_with("error kind=config"));

    let out = run(&["analyze", "--graph", &p(d, "missing.fdg"), "--out", &p(d, "a.json")]);
    assert_eq!(out.status.code(), Some(4));
    assert!(error_line(&out).starts_with("error kind=io"));

    std::fs::write(d.join("bad.fdg"), b"NOPE\x01\x00\x00\x00").unwrap();
    let out = run(&["analyze", "--graph", &p(d, "bad.fdg"), "--out", &p(d, "a.json")]);
    assert_eq!(out.status.code(), Some(5));
    assert!(error_line(&out).contains("kind=format"));

    let out = run(&[
        "search", "--graph", &p(d, "g.fdg"), "--base", &p(d, "base.fvecs"), "--queries", &p(d, "q.fvecs"),
        "--l", "5", "--k", "10", "--out", &p(d, "x.json"),
    ]);
    assert_eq!(out.status.code(), Some(6));
    assert!(error_line(&out).contains("kind=contract"));
}

#[test]
fn analyze_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    ok(&["analyze", "--graph", &p(d, "g.fdg"), "--out", &p(d, "report.json")]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["n"], 200);
    assert_eq!(v["k_max"], 16);
    assert!(v["average_lcc"].as_f64().unwrap() > 0.0);
}

#[test]
fn adapt_round_trips_through_adjlist() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    ok(&["adapt", "--input", &p(d, "g.fdg"), "--from", "fixed-bin", "--to", "adjlist-text", "--out", &p(d, "g.txt")]);
    let out = ok(&["adapt", "--input", &p(d, "g.txt"), "--from", "adjlist-text", "--k-cap", "16", "--out", &p(d, "g2.fdg")]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"dropped_edges\":0"));
    assert_eq!(std::fs::read(d.join("g.fdg")).unwrap(), std::fs::read(d.join("g2.fdg")).unwrap());
}
