use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biasedwalk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// Two 4-cliques joined by one edge, with labels by clique.
fn two_cliques(dir: &TempDir) -> (PathBuf, PathBuf) {
    let mut edges = String::new();
    let mut labels = String::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges += &format!("n{} n{}\n", base + i, base + j);
            }
            labels += &format!("n{}\t{}\n", base + i, base / 4);
        }
    }
    edges += "n3 n4\n";
    (write(dir, "cliques.edges", &edges), write(dir, "cliques.labels", &labels))
}

const FAST: &[&str] = &["--num-walks", "4", "--walk-length", "12", "--dim", "8", "--window", "3", "--workers", "1"];

#[test]
fn embed_writes_header_and_manifest() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "tri.edges", "a b\nb c\nc a\n");
    let out = dir.path().join("emb.txt");
    ok(&["embed", "--input", s(&g), "--output", s(&out), "--num-walks", "2", "--walk-length", "5"]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("3 128"));
    assert_eq!(text.lines().count(), 4);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("emb.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"]["command"], "embed");
    assert_eq!(manifest["command"]["shape"]["num_walks"], 2);
    assert_eq!(manifest["command"]["train"]["window"], 10);
    assert!(manifest["stage_seconds"]["sampling"].as_f64().is_some());
    assert!(manifest["stage_seconds"]["training"].as_f64().is_some());
}

#[test]
fn deterministic_runs_are_byte_identical_and_replayable() {
    let dir = TempDir::new().unwrap();
    let (g, _) = two_cliques(&dir);
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let mut args = vec!["embed", "--input", s(&g), "--output", s(out), "--seed", "7", "--deterministic"];
        args.extend_from_slice(FAST);
        ok(&args);
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    fs::remove_file(&a).unwrap();
    ok(&["replay", s(&dir.path().join("a.txt.manifest.json"))]);
    assert_eq!(fs::read(&a).unwrap(), first);

    let uniform = dir.path().join("u.txt");
    let mut args = vec!["embed", "--input", s(&g), "--output", s(&uniform), "--walk-type", "uniform", "--deterministic"];
    args.extend_from_slice(FAST);
    ok(&args);
}

#[test]
fn walks_command_line_counts() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "p.edges", "1 2\n2 3\n3 4\n4 5\n");
    let out = dir.path().join("walks.txt");
    ok(&["walks", "--input", s(&g), "--output", s(&out), "--num-walks", "1"]);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 5);
    ok(&["walks", "--input", s(&g), "--output", s(&out), "--num-walks", "3", "--walk-length", "4"]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 15);
    assert!(text.lines().all(|l| l.split(' ').count() == 4));

    let empty = write(&dir, "empty.edges", "# nothing\n");
    let res = run(&["walks", "--input", s(&empty), "--output", s(&out)]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn exit_codes_separate_error_kinds() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.txt");
    let bad = write(&dir, "bad.edges", "a b\nb c -1\n");
    let res = run(&["walks", "--input", s(&bad), "--output", s(&out)]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains(":2:"));

    let g = write(&dir, "g.edges", "a b\n");
    assert_eq!(run(&["walks", "--input", s(&g), "--output", s(&out), "--alpha", "1.5"]).status.code(), Some(4));
    assert_eq!(run(&["walks", "--input", s(&g), "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["walks", "--input", "/nonexistent/x", "--output", s(&out)]).status.code(), Some(1));
}

#[test]
fn nodeclass_rows_and_missing_labels() {
    let dir = TempDir::new().unwrap();
    let (g, labels) = two_cliques(&dir);
    let out = dir.path().join("nc.csv");
    let mut args = vec!["nodeclass", "--input", s(&g), "--labels", s(&labels), "--output", s(&out), "--instances", "3", "--deterministic"];
    args.extend_from_slice(FAST);
    let res = ok(&args);
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("setting,fold,macro_f1,micro_f1"));
    assert_eq!(lines.count(), 9 * 3);
    assert!(String::from_utf8_lossy(&res.stdout).contains("50/50 split over 3 instances"));

    let missing = dir.path().join("absent.labels");
    let mut args = vec!["nodeclass", "--input", s(&g), "--labels", s(&missing), "--output", s(&out)];
    args.extend_from_slice(FAST);
    assert!(!run(&args).status.success());
}

#[test]
fn linkpred_splits_and_errors() {
    let dir = TempDir::new().unwrap();
    let mut edges = String::new();
    for i in 0..12 {
        for d in [1, 2, 5] {
            edges += &format!("{} {}\n", i, (i + d) % 12);
        }
    }
    let g = write(&dir, "circ.edges", &edges);
    let run_split = |name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["linkpred", "--input", s(&g), "--output", s(&out), "--instances", "2", "--seed", "3", "--deterministic"];
        args.extend_from_slice(FAST);
        ok(&args);
        out
    };
    let a = run_split("lp_a");
    let b = run_split("lp_b");
    for f in ["split-0/residual.edges", "split-0/positives.edges", "split-1/negatives.edges", "scores.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read_to_string(a.join("split-0/positives.edges")).unwrap().lines().count(), 18);
    assert_eq!(fs::read_to_string(a.join("scores.csv")).unwrap().lines().count(), 3);
    assert!(a.join("manifest.json").exists());

    let tree = write(&dir, "tree.edges", "0 1\n0 2\n0 3\n0 4\n");
    let res = run(&["linkpred", "--input", s(&tree), "--output", s(&dir.path().join("t"))]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("insufficient removable edges"));
}

#[test]
fn sweep_reports_every_cell() {
    let dir = TempDir::new().unwrap();
    let (g, labels) = two_cliques(&dir);
    let out = dir.path().join("sweep.csv");
    let mut args = vec![
        "sweep", "--input", s(&g), "--labels", s(&labels), "--output", s(&out), "--walk-types", "dfs", "--alphas", "0.25", "--folds", "2",
        "--deterministic",
    ];
    args.extend_from_slice(FAST);
    let res = ok(&args);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("best: dfs:0.25"), "{stdout}");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 3);

    let mut args = vec![
        "sweep", "--input", s(&g), "--labels", s(&labels), "--output", s(&out), "--alphas", "0.5,1", "--folds", "2", "--deterministic",
    ];
    args.extend_from_slice(FAST);
    let res = ok(&args);
    let stdout = String::from_utf8_lossy(&res.stdout);
    for cell in ["bfs:0.5", "bfs:1", "dfs:0.5", "dfs:1"] {
        assert!(stdout.contains(cell), "{stdout}");
    }
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 4 * 2);
}

#[test]
fn bench_emits_one_row_per_size() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bench.csv");
    ok(&[
        "bench", "--sizes", "50,100,200", "--output", s(&out), "--num-walks", "1", "--walk-length", "10", "--dim", "4", "--window", "2",
    ]);
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("n,sampling_seconds,total_seconds"));
    let ns: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["50", "100", "200"]);
}

#[test]
fn generate_and_lcc() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("er.edges");
    ok(&["generate", "--nodes", "100", "--degree", "10", "--seed", "1", "--output", s(&g)]);
    assert_eq!(fs::read_to_string(&g).unwrap().lines().count(), 500);

    let two = write(&dir, "two.edges", "a b\nb c\nc a\nx y\n");
    let out = dir.path().join("lcc.edges");
    let res = ok(&["lcc", "--input", s(&two), "--output", s(&out)]);
    assert!(String::from_utf8_lossy(&res.stdout).contains("kept 3 of 5 nodes"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 3);
}
