use std::fs;
use std::path::Path;

use streampca::cli::{run_cli, EXIT_DATASET, EXIT_OK, EXIT_SCHEMA};

const MINIMAL: &str = r#"
k = 2
total_points = 10000
checkpoints = [0, 1000, 10000]
trials = 2
base_seed = 5

[stream]
kind = "synthetic"
d = 20
spectrum = { top = [0.2, 0.15], tail_first = 0.05, tail_ratio = 0.8 }
rotation_seed = 3

[[grid]]
id = "spca-50"
algorithm = "spca"
c = 50

[[grid]]
id = "alecton-0.1"
algorithm = "alecton"
rate = 0.1

[[grid]]
id = "dbpca-0.8"
algorithm = "dbpca"
gamma_sq = 0.8

[[grid]]
id = "bpca-1"
algorithm = "bpca"
l = 1
"#;

fn run(args: &[&str]) -> i32 {
    let mut all = vec!["streampca"];
    all.extend_from_slice(args);
    run_cli(all)
}

fn run_config(dir: &Path, name: &str, text: &str, out: &str, extra: &[&str]) -> i32 {
    let cfg = dir.join(name);
    fs::write(&cfg, text).unwrap();
    let out = dir.join(out);
    let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn minimal_run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_config(dir.path(), "c.toml", MINIMAL, "out", &["--threads", "2"]), EXIT_OK);
    let out = dir.path().join("out");
    for f in ["manifest.toml", "trials.csv", "summary.csv", "best.csv", "comparison.csv", "curves.svg"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let trials = fs::read_to_string(out.join("trials.csv")).unwrap();
    assert!(trials.starts_with("config_id,trial,seed,checkpoint,error,status\n"));
    assert_eq!(trials.lines().count(), 1 + 4 * 2 * 3);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("config_id,checkpoint,mean,stderr,count\n"));
    assert_eq!(summary.lines().count(), 1 + 4 * 3);
    let svg = fs::read_to_string(out.join("curves.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_config(dir.path(), "c.toml", MINIMAL, "a", &["--threads", "1"]), EXIT_OK);
    assert_eq!(run_config(dir.path(), "c.toml", MINIMAL, "b", &["--threads", "3"]), EXIT_OK);
    let manifest = fs::read_to_string(dir.path().join("a/manifest.toml")).unwrap();
    assert_eq!(run_config(dir.path(), "m.toml", &manifest, "c", &["--no-plots"]), EXIT_OK);
    for f in ["trials.csv", "summary.csv", "best.csv", "comparison.csv", "manifest.toml"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(dir.path().join("c").join(f)).unwrap(), "{f}");
    }
    assert!(!dir.path().join("c/curves.svg").exists());
}

#[test]
fn schema_violations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(run_config(p, "a.toml", &MINIMAL.replace("trials = 2", "trials = 0"), "o", &[]), EXIT_SCHEMA);
    assert_eq!(run_config(p, "b.toml", &MINIMAL.replace("c = 50", "c = 50\nbogus = 1"), "o", &[]), EXIT_SCHEMA);
    assert_eq!(run_config(p, "c.toml", "not toml [", "o", &[]), EXIT_SCHEMA);
    assert_eq!(run(&["run", "--config", "/does/not/exist.toml", "--out", "/tmp/x"]), EXIT_SCHEMA);
    assert_eq!(run(&["frobnicate"]), EXIT_SCHEMA);
    assert!(!p.join("o").exists());
}

#[test]
fn bag_of_words_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = String::from("30\n12\n");
    let mut entries = Vec::new();
    for doc in 1..=30 {
        for word in 1..=12 {
            if (doc * 7 + word * 3) % 5 < 2 {
                entries.push(format!("{doc} {word} {}", 1 + (doc + word) % 4));
            }
        }
    }
    corpus.push_str(&format!("{}\n{}\n", entries.len(), entries.join("\n")));
    fs::write(dir.path().join("docword.toy.txt"), corpus).unwrap();
    let cfg = r#"
k = 2
total_points = 600
checkpoints = [100, 600]
trials = 2
[stream]
kind = "bag_of_words"
path = "docword.toy.txt"
[oracle]
iterations = 500
seed = 1
[[grid]]
id = "spca"
algorithm = "spca"
c = 10
[[grid]]
id = "dbpca"
algorithm = "dbpca"
gamma_sq = 0.7
"#;
    assert_eq!(run_config(dir.path(), "bow.toml", cfg, "out", &[]), EXIT_OK);
    let manifest = fs::read_to_string(dir.path().join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("per-feature max scaling"));
    assert!(manifest.contains("oracle_iterations_used"));

    let missing = cfg.replace("docword.toy.txt", "docword.missing.txt");
    assert_eq!(run_config(dir.path(), "bad.toml", &missing, "out2", &[]), EXIT_DATASET);
    let malformed = dir.path().join("docword.bad.txt");
    fs::write(&malformed, "2\n3\n1\n1 9 1\n").unwrap();
    let bad = cfg.replace("docword.toy.txt", "docword.bad.txt");
    assert_eq!(run_config(dir.path(), "bad2.toml", &bad, "out3", &[]), EXIT_DATASET);
}

#[test]
fn plot_command() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    fs::write(&summary, "config_id,checkpoint,mean,stderr,count\na,10,0.5,0.01,2\na,20,0.3,0.01,2\na,30,0.1,0,2\n").unwrap();
    let svg = dir.path().join("c.svg");
    assert_eq!(run(&["plot", "--summary", summary.to_str().unwrap(), "--out", svg.to_str().unwrap()]), EXIT_OK);
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);

    fs::write(&summary, "config_id,checkpoint,mean,stderr,count\n").unwrap();
    assert_eq!(run(&["plot", "--summary", summary.to_str().unwrap(), "--out", svg.to_str().unwrap()]), EXIT_SCHEMA);
    fs::write(&summary, "a,b\n1,2\n").unwrap();
    assert_eq!(run(&["plot", "--summary", summary.to_str().unwrap(), "--out", svg.to_str().unwrap()]), EXIT_SCHEMA);
}

#[test]
fn generate_writes_a_runnable_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.toml");
    assert_eq!(
        run(&["generate", "--out", cfg.to_str().unwrap(), "--d", "30", "--k", "2", "--total-points", "4000", "--trials", "2"]),
        EXIT_OK
    );
    let out = dir.path().join("out");
    assert_eq!(
        run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-plots"]),
        EXIT_OK
    );
    assert_eq!(run(&["generate", "--out", cfg.to_str().unwrap(), "--k", "9"]), EXIT_SCHEMA);
}
