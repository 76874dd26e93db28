use std::path::Path;
use std::process::{Command, Output};

fn cogame(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_cogame"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "cogame {args:?} failed\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const TINY: &str = "problem = \"tsp\"
nodes = 6
epochs = 2
instances_per_epoch = 32
batch_size = 16
validation_size = 8

[policy]
hidden = 8
heads = 2
layers = 2
";

#[test]
fn generate_train_solve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cogame(
        &[
            "generate",
            "--problem",
            "tsp",
            "--nodes",
            "6",
            "--count",
            "2",
            "--out",
            "inst",
        ],
        d,
    );
    let pts = d.join("inst/tsp-n6-0000.pts");
    assert!(pts.exists());

    std::fs::write(d.join("tiny.toml"), TINY).unwrap();
    let out = stdout(&cogame(
        &["train", "--config", "tiny.toml", "--out", "run"],
        d,
    ));
    assert_eq!(
        out.lines().filter(|l| l.starts_with("epoch")).count(),
        3,
        "{out}"
    );
    let metrics = std::fs::read_to_string(d.join("run/metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 4);

    let out = stdout(&cogame(
        &[
            "solve",
            "--instance",
            "inst/tsp-n6-0000.pts",
            "--checkpoint",
            "run/best.ckpt",
            "--trajectory",
            "t.ndjson",
        ],
        d,
    ));
    assert!(out.contains("valid: true") && out.contains("gap:"), "{out}");
    let steps = std::fs::read_to_string(d.join("t.ndjson")).unwrap();
    assert!(steps.lines().count() >= 1);

    let out = stdout(&cogame(
        &[
            "solve",
            "--instance",
            "inst/tsp-n6-0001.pts",
            "--method",
            "held_karp",
        ],
        d,
    ));
    assert!(out.contains("gap: 1.000000"), "{out}");
}

#[test]
fn bench_writes_results_timing_and_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cogame(
        &["bench", "--nodes", "8", "--count", "5", "--out", "b.csv"],
        d,
    );
    let results = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 4 * 5);
    assert!(results.starts_with("method,instance,seed,value,gap,error"));
    assert!(d.join("b.timing.csv").exists() && d.join("b.gaps.csv").exists());

    cogame(
        &[
            "bench",
            "--tsplib",
            "eil51",
            "--methods",
            "farthest",
            "--out",
            "t.csv",
        ],
        d,
    );
    let row = std::fs::read_to_string(d.join("t.csv")).unwrap();
    assert!(
        row.lines().nth(1).unwrap().starts_with("farthest,eil51,0,"),
        "{row}"
    );
}

#[test]
fn oracle_check_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = stdout(&cogame(
        &[
            "oracle-check",
            "--graphs-per-kind",
            "5",
            "--digraphs",
            "5",
            "--tours",
            "2",
        ],
        d,
    ));
    assert!(!out.is_empty());
    let bad = Command::new(env!("CARGO_BIN_EXE_cogame"))
        .args(["solve", "--instance", "missing.pts", "--method", "nearest"])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
