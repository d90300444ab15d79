//! Every example runs to completion. `cargo test` builds the examples next
//! to the test binaries, so they are run from there.

use std::path::PathBuf;
use std::process::Command;

fn example_path(name: &str) -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/examples-<hash> -> target/<profile>/examples/<name>
    let profile_dir = exe.parent().and_then(|deps| deps.parent()).unwrap();
    profile_dir.join("examples").join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn run(name: &str) -> String {
    let path = example_path(name);
    let out = Command::new(&path).output().unwrap_or_else(|e| panic!("running {}: {e}", path.display()));
    assert!(out.status.success(), "{name} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn cluster_graph() {
    assert!(run("cluster_graph").contains("-> {a,b,c,d,e,f}"));
}

#[test]
fn score_tree() {
    assert!(run("score_tree").contains("gap J + objective = 0.00e0"));
}

#[test]
fn cut_dendrogram() {
    assert!(run("cut_dendrogram").contains("k = 2: abc | def"));
}

#[test]
fn reconstruct_graph() {
    assert!(run("reconstruct_graph").contains("a b 0.103448275862"));
}

#[test]
fn exhaustive_oracle() {
    assert!(run("exhaustive_oracle").contains("945 shapes on 6 leaves"));
}

#[test]
fn serialize_trees() {
    assert!(run("serialize_trees").contains("newick: ((a:0.5,b:0.5):0.25,c:0.75);"));
}

#[test]
fn custom_prior() {
    assert!(run("custom_prior").contains("heavy hub: first merge a+b"));
}
