use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::io::Write as _;

use dendrograph::cli::run;
use serde_json::Value;

const P3: &str = "a b\nb c\n";
const K3: &str = "a b\nb c\na c\n";

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn call(args: &[&str], stdin: &str) -> Outcome {
    let mut input = stdin.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("dendrograph").chain(args.iter().copied());
    let code = run(argv, &mut input, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn json(o: &Outcome) -> Value {
    assert_eq!(o.code, 0, "stderr: {}", o.stderr);
    serde_json::from_str(&o.stdout).unwrap()
}

/// A scratch directory unique to one test.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dendrograph-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, text: &str) -> String {
    let path = dir.join(file);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn cluster_path_degree_prior() {
    let o = call(&["cluster"], P3);
    assert_eq!(o.stdout, "{\"labels\":[\"a\",\"b\",\"c\"],\"merges\":[[0,1,0.5],[3,2,0.75]],\"n_leaves\":3}\n");
    assert!(o.stderr.starts_with("n=3 total_weight=4 J="), "{}", o.stderr);
    assert!(o.stderr.contains("tree_objective=0.490414626506"));
}

#[test]
fn cluster_path_uniform_prior() {
    for algorithm in ["naive", "nn-chain"] {
        let v = json(&call(&["cluster", "--prior", "uniform", "--algorithm", algorithm], P3));
        assert_eq!(v["merges"], serde_json::json!([[0, 1, 0.444444444444], [3, 2, 0.888888888889]]));
    }
}

#[test]
fn cluster_errors() {
    let o = call(&["cluster"], "a a 1\n");
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 1"), "{}", o.stderr);
    assert_eq!(call(&["cluster", "--drop-self-loops"], "a a 1\na b\n").code, 0);
    assert_eq!(call(&["cluster"], "a b\nc d\n").code, 3);
    assert_eq!(call(&["cluster"], "a b x\n").code, 2);
    assert_eq!(call(&["cluster", "--prior", "wide"], P3).code, 2);
    assert_eq!(call(&["cluster", "--algorithm", "fast"], P3).code, 2);
    assert_eq!(call(&["frobnicate"], P3).code, 2);
    assert_eq!(call(&["--help"], "").code, 0);
}

#[test]
fn quiet_suppresses_diagnostics() {
    let o = call(&["--quiet", "cluster"], P3);
    assert_eq!(o.code, 0);
    assert!(o.stderr.is_empty());
}

#[test]
fn custom_prior_from_file() {
    let dir = scratch("prior");
    let file = write(&dir, "prior.txt", "a 1\nb 2\nc 1\n");
    let graph = write(&dir, "p3.txt", P3);
    let by_eq = call(&["cluster", "--input", &graph, "--prior", &format!("custom={file}")], "");
    let by_flag = call(&["cluster", "--input", &graph, "--prior", "custom", "--prior-file", &file], "");
    // proportional to degree, so the degree-prior tree comes back
    assert_eq!(json(&by_eq)["merges"], serde_json::json!([[0, 1, 0.5], [3, 2, 0.75]]));
    assert_eq!(by_eq.stdout, by_flag.stdout);
    assert_eq!(call(&["cluster", "--input", &graph, "--prior", "custom"], "").code, 2);
    let bad = write(&dir, "bad.txt", "a 1\nb 0\nc 1\n");
    assert_eq!(call(&["cluster", "--input", &graph, "--prior", &format!("custom={bad}")], "").code, 2);
}

#[test]
fn score_reports() {
    let dir = scratch("score");
    let graph = write(&dir, "p3.txt", P3);
    let d = call(&["cluster", "--input", &graph], "").stdout;
    let v = json(&call(&["score", "--input", &graph], &d));
    let kl = v["kl_reconstruction"].as_f64().unwrap();
    assert!((kl - 0.5 * 1.5f64.ln()).abs() < 1e-11, "{kl}");
    for key in ["cost_J", "tree_objective", "kl_reconstruction", "dasgupta", "log_cost"] {
        assert!(v[key].is_number(), "{key} missing");
    }
    assert_eq!(v["heights_reoptimized"], Value::Bool(false));
    let v = json(&call(&["score", "--input", &graph, "--reoptimize-heights"], &d));
    assert!(v["optimality_gap"].as_f64().unwrap().abs() < 1e-9);

    let k3 = write(&dir, "k3.txt", K3);
    let d = call(&["cluster", "--input", &k3], "").stdout;
    let v = json(&call(&["score", "--input", &k3, "--reoptimize-heights"], &d));
    assert!(v["kl_reconstruction"].as_f64().unwrap().abs() < 1e-12);

    let four = write(&dir, "p4.txt", "a b\nb c\nc d\n");
    let d4 = call(&["cluster", "--input", &four], "").stdout;
    let o = call(&["score", "--input", &graph], &d4);
    assert_eq!(o.code, 2);
    let renamed = d.replace("\"c\"", "\"d\"");
    assert_eq!(call(&["score", "--input", &k3], &renamed).code, 2);
}

#[test]
fn cut_examples() {
    let d = call(&["cluster"], P3).stdout;
    assert_eq!(call(&["cut", "--k", "2"], &d).stdout, "[[\"a\",\"b\"],[\"c\"]]\n");
    assert_eq!(call(&["cut", "--k", "1"], &d).stdout, "[[\"a\",\"b\",\"c\"]]\n");
    assert_eq!(call(&["cut", "--height", "0"], &d).stdout, "[[\"a\"],[\"b\"],[\"c\"]]\n");
    assert_eq!(call(&["cut", "--height", "0.6"], &d).stdout, "[[\"a\",\"b\"],[\"c\"]]\n");
    assert_eq!(call(&["cut", "--k", "4"], &d).code, 2);
    assert_eq!(call(&["cut", "--k", "0"], &d).code, 2);
    assert_eq!(call(&["cut", "--k", "2", "--height", "1"], &d).code, 2);
    assert_eq!(call(&["cut"], &d).code, 2);
    assert_eq!(call(&["cut", "--height", "-1"], &d).code, 2);
}

#[test]
fn cut_rejects_irregular_json() {
    let irregular = r#"{"labels":["a","b","c"],"merges":[[0,1,0.9],[3,2,0.5]],"n_leaves":3}"#;
    let o = call(&["cut", "--k", "2"], irregular);
    assert_eq!(o.code, 2);
}

#[test]
fn reconstruct_examples() {
    let dir = scratch("reconstruct");
    let graph = write(&dir, "p3.txt", P3);
    let d = call(&["cluster", "--input", &graph], "").stdout;
    let o = call(&["reconstruct", "--input", &graph, "--threshold", "0.1"], &d);
    assert_eq!(o.stdout, "a b 0.25\nb c 0.166666666667\n");
    let o = call(&["reconstruct", "--input", &graph], &d);
    assert_eq!(o.stdout.lines().count(), 3);
    assert_eq!(call(&["reconstruct", "--input", &graph, "--threshold", "1"], &d).stdout, "");
    // the degree prior needs the graph
    assert_eq!(call(&["reconstruct"], &d).code, 2);
    assert_eq!(call(&["reconstruct", "--prior", "uniform"], &d).code, 0);
    assert_eq!(call(&["reconstruct", "--input", &graph, "--threshold", "-1"], &d).code, 2);
}

#[test]
fn oracle_examples() {
    let v = json(&call(&["oracle"], P3));
    assert_eq!(v["objective"], "kl");
    assert!((v["score"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-11);
    assert!((v["greedy_score"].as_f64().unwrap() - 0.5 * (8.0f64 / 3.0).ln()).abs() < 1e-11);
    assert!((v["gap"].as_f64().unwrap() - (2f64.ln() - 0.5 * (8.0f64 / 3.0).ln())).abs() < 1e-11);
    assert_eq!(v["n_shapes_searched"], 3);

    let v = json(&call(&["oracle"], K3));
    assert_eq!(v["gap"].as_f64().unwrap(), 0.0);

    let v = json(&call(&["oracle", "--objective", "dasgupta"], P3));
    assert_eq!(v["score"].as_f64().unwrap(), 2.5);

    let big: String = (1..12).map(|i| format!("v{} v{}\n", i - 1, i)).collect();
    let o = call(&["oracle"], &big);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("(2n-3)!!"), "{}", o.stderr);
}

#[test]
fn output_is_deterministic() {
    let graph = "a b 2\nb c\nc d 3\nd a\na c 0.5\nd e\ne f\nf d 2\n";
    for args in [&["cluster"][..], &["cluster", "--algorithm", "naive"], &["oracle"]] {
        let first = call(args, graph);
        assert_eq!(first.code, 0);
        for _ in 0..3 {
            let again = call(args, graph);
            assert_eq!(again.stdout, first.stdout);
            assert_eq!(again.stderr, first.stderr);
        }
    }
}

#[test]
fn output_file() {
    let dir = scratch("output");
    let path = dir.join("tree.json");
    let o = call(&["cluster", "--output", path.to_str().unwrap()], P3);
    assert_eq!(o.code, 0);
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, call(&["cluster"], P3).stdout);
}

/// The real binary, with cluster output piped into the other subcommands.
#[test]
fn binary_pipeline() {
    let dir = scratch("binary");
    let graph = write(&dir, "g.txt", "# two triangles\nx y\ny z\nz x\nz u 0.5\nu v\nv w\nw u\n");
    let exe = env!("CARGO_BIN_EXE_dendrograph");
    let spawn = |args: &[&str], input: &str| {
        let mut child = Command::new(exe)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
        child.wait_with_output().unwrap()
    };
    let cluster = spawn(&["cluster", "--input", &graph], "");
    assert!(cluster.status.success());
    let tree = String::from_utf8(cluster.stdout).unwrap();

    let cut = spawn(&["cut", "--k", "2"], &tree);
    assert!(cut.status.success());
    assert_eq!(String::from_utf8(cut.stdout).unwrap(), "[[\"u\",\"v\",\"w\"],[\"x\",\"y\",\"z\"]]\n");

    let score = spawn(&["score", "--input", &graph, "--reoptimize-heights"], &tree);
    assert!(score.status.success());
    let v: Value = serde_json::from_slice(&score.stdout).unwrap();
    assert!(v["optimality_gap"].as_f64().unwrap().abs() < 1e-9);

    let rec = spawn(&["reconstruct", "--input", &graph, "--threshold", "0.01"], &tree);
    assert!(rec.status.success());
    assert!(!rec.stdout.is_empty());

    let disconnected = spawn(&["cluster"], "a b\nc d\n");
    assert_eq!(disconnected.status.code(), Some(3));
    assert!(!disconnected.stderr.is_empty());
}
