use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use robustmean::bench::read_csv;
use robustmean::netmax::CoverSet;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robustmean"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn estimate_of(out: &Output) -> Vec<f64> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    v["estimate"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn mean_and_header_detection() {
    let dir = tempfile::tempdir().unwrap();
    let with_header = write(dir.path(), "a.csv", "x,y\n0,0\n2,4\n");
    let bare = write(dir.path(), "b.csv", "0,0\n2,4\n");
    for path in [&with_header, &bare] {
        assert_eq!(estimate_of(&run(&["estimate", "--method", "mean", "--in", path])), vec![1.0, 2.0]);
    }
}

#[test]
fn filter_removes_outlier() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = "0,0\n".repeat(99);
    text.push_str("100,0\n");
    let path = write(dir.path(), "f.csv", &text);
    // With one removal the outlier goes first with probability 0.99; the seed
    // is fixed so the outcome is too.
    let out = run(&["estimate", "--method", "filter", "--in", &path, "--cov-bound", "1", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(out.status.success());
    let removed = v["removed_indices"].as_array().unwrap();
    if removed.first().and_then(|x| x.as_u64()) == Some(99) {
        assert_eq!(estimate_of(&out), vec![0.0, 0.0]);
    }
    let fixed = run(&["estimate", "--method", "filter", "--in", &path, "--stop-mode", "fixed", "--steps", "0"]);
    assert_eq!(estimate_of(&fixed), vec![1.0, 0.0]);
}

#[test]
fn interval_gmom_srm_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (0..200).map(|i| format!("{}", ((i * 37) % 101) as f64 / 50.0 - 1.0)).collect();
    let one = write(dir.path(), "one.csv", &(values.join("\n") + "\n"));
    let est = estimate_of(&run(&["estimate", "--method", "interval", "--in", &one, "--epsilon", "0.05"]));
    assert!(est[0].abs() < 0.2);
    let est = estimate_of(&run(&["estimate", "--method", "gmom", "--in", &one, "--blocks", "1"]));
    assert!(est[0].abs() < 0.05);

    let small = write(dir.path(), "s.csv", "0\n0\n0\n100\n");
    assert_eq!(estimate_of(&run(&["estimate", "--method", "srm", "--in", &small, "--epsilon", "0.25"])), vec![0.0]);
    let pts = write(dir.path(), "o.csv", "-1\n0\n1\n10\n");
    let args = ["estimate", "--method", "oracle", "--in", &pts, "--true-mean", "0", "--radius", "2"];
    assert_eq!(estimate_of(&run(&args)), vec![0.0]);
    let neg = ["estimate", "--method", "oracle", "--in", &pts, "--true-mean=-50", "--radius", "1"];
    assert_eq!(run(&neg).status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["estimate", "--method", "mean", "--in", "/nonexistent.csv"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--method", "bogus", "--in", "x"]).status.code(), Some(2));
    let big = write(dir.path(), "big.csv", &"1\n".repeat(30));
    assert_eq!(run(&["estimate", "--method", "srm", "--in", &big]).status.code(), Some(2));
    let two = write(dir.path(), "two.csv", "1,2\n3,4\n5,6\n7,8\n");
    assert_eq!(run(&["estimate", "--method", "interval", "--in", &two]).status.code(), Some(2));
    // Bad precondition: ε too large for the sample size.
    let few = write(dir.path(), "few.csv", "1\n2\n3\n4\n");
    assert_eq!(run(&["estimate", "--method", "interval", "--in", &few, "--epsilon", "0.3"]).status.code(), Some(2));
    // Two identical values: the filter cannot act and exhausts.
    let pair = write(dir.path(), "pair.csv", "0\n1\n");
    let args = ["estimate", "--method", "filter", "--in", &pair, "--stop-mode", "fixed", "--steps", "5"];
    assert_eq!(run(&args).status.code(), Some(3));
}

#[test]
fn cover_build_and_net() {
    let dir = tempfile::tempdir().unwrap();
    let cover = dir.path().join("c.csv");
    let out = run(&["cover", "build", "--p", "2", "--out", cover.to_str().unwrap(), "--seed", "4"]);
    assert!(out.status.success());
    let loaded = CoverSet::read_csv(fs::File::open(&cover).unwrap(), None).unwrap();
    assert_eq!(loaded.dim(), 2);
    assert!(loaded.certify(2000, 1).is_ok());

    let rows: Vec<String> = (0..300).map(|i| format!("{},{}", 5.0 + ((i * 13) % 7) as f64 / 7.0, -2.0)).collect();
    let data = write(dir.path(), "d.csv", &(rows.join("\n") + "\n"));
    let with_cover = ["estimate", "--method", "net", "--in", &data, "--cover", cover.to_str().unwrap()];
    let est = estimate_of(&run(&with_cover));
    assert!((est[0] - 5.43).abs() < 0.3 && (est[1] + 2.0).abs() < 0.3, "{est:?}");
    let est = estimate_of(&run(&["estimate", "--method", "net", "--in", &data, "--inner", "filter"]));
    assert!((est[0] - 5.43).abs() < 0.3 && (est[1] + 2.0).abs() < 0.3, "{est:?}");

    let sparse = dir.path().join("s.csv");
    assert!(run(&["cover", "build", "--p", "4", "--sparsity", "1", "--out", sparse.to_str().unwrap()]).status.success());
    assert_eq!(run(&["cover", "build", "--p", "3", "--sparsity", "2", "--out", sparse.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn bench_run_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"distribution": {"family": "pareto", "p": 3, "tail_beta": 3.0},
            "methods": [{"method": "mean"}, {"method": "coord"}, {"method": "oracle", "radius": 1e-9}],
            "n_values": [30, 50], "delta": 0.1, "trials": 20, "master_seed": 5}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run(&["bench", "run", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let seq = bin()
        .args(["bench", "run", "--config", &cfg, "--out", b.to_str().unwrap(), "--sequential"])
        .env("ROBUSTMEAN_THREADS", "1")
        .output()
        .unwrap();
    assert!(seq.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let records = read_csv(fs::File::open(&a).unwrap()).unwrap();
    assert_eq!(records.len(), 3 * 2 * 20);
    assert_eq!(records.iter().filter(|r| r.failed()).count(), 40);

    let out = run(&["bench", "summarize", "--in", a.to_str().unwrap(), "--delta", "0.1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,n,p,delta,q_delta,mean_loss,failure_rate,trials");
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines.iter().any(|l| l.starts_with("oracle,30,3,") && l.ends_with(",NaN,NaN,1.0000000000000000e0,20")));
    let grid = run(&["bench", "summarize", "--in", a.to_str().unwrap()]);
    assert_eq!(String::from_utf8(grid.stdout).unwrap().lines().count(), 1 + 6 * 5);

    let bad = write(dir.path(), "bad.json", r#"{"distribution": {"family": "gaussian", "p": 2}, "methods": [], "n_values": [10], "delta": 0.1}"#);
    assert_eq!(run(&["bench", "run", "--config", &bad, "--out", a.to_str().unwrap()]).status.code(), Some(2));
}
