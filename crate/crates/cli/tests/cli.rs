use std::path::Path;
use std::process::{Command, Output};

fn cyclelab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclelab"))
        .args(args)
        .current_dir(dir)
        .env("CYCLELAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_then_query_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyclelab(&["gen", "gnp", "--n", "10", "--p", "1", "--out", "k10.txt"], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("k10.txt")).unwrap();
    assert_eq!(text.lines().next(), Some("10 45"));
    let o = cyclelab(&["oracle", "has-cycle", "--in", "k10.txt", "--t", "10"], dir.path());
    assert_eq!(stdout(&o).trim(), "true");
    let o = cyclelab(&["oracle", "spectrum", "--in", "k10.txt"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["circumference"], 10);
    assert_eq!(v["girth"], 3);
}

#[test]
fn regular_graph_passes_through_mixing_check() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cyclelab(&["gen", "regular", "--n", "40", "--d", "6", "--seed", "3", "--out", "r.txt"], dir.path())
        .status
        .success());
    let o = cyclelab(&["check", "mixing", "--in", "r.txt"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["d"], 6);
    assert_eq!(v["verdict"]["holds"], true);
}

#[test]
fn find_cycle_writes_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cyclelab(&["gen", "gnp", "--n", "300", "--p", "0.2", "--seed", "1", "--out", "g.txt"], dir.path())
        .status
        .success());
    let o = cyclelab(
        &["find-cycle", "--in", "g.txt", "--t", "41", "--k", "4", "--eps", "1/10", "--cert", "c.json"],
        dir.path(),
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"], "success");
    assert_eq!(v["verified"], true);
    let cert = cyclelab::stitcher::CycleCertificate::from_json(&std::fs::read_to_string(dir.path().join("c.json")).unwrap())
        .unwrap();
    let g = cyclelab::Graph::load(dir.path().join("g.txt")).unwrap();
    assert!(cert.verify(&g));
    assert_eq!(cert.cycle.len(), 41);
}

#[test]
fn extremal_rows_and_other_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyclelab(&["extremal", "--n", "10", "--t", "7"], dir.path());
    assert_eq!(stdout(&o), "n,t,parity,g_num,g_den,w_num,w_den,eg_path,eg_cycle\n10,7,odd,26,45,26,45,30,27\n");
    assert!(cyclelab(&["gen", "gnp", "--n", "200", "--p", "0.1", "--out", "g.txt"], dir.path()).status.success());
    for args in [
        vec!["sgraph", "--in", "g.txt", "--k", "4", "--eps", "0.1"],
        vec!["expander", "dfs-partition", "--in", "g.txt"],
        vec!["embed", "trhl", "--in", "g.txt", "--eps", "0.05", "--ell", "21"],
        vec!["ramsey", "mono-odd", "--in", "g.txt", "--r", "2"],
        vec!["check", "uniformity", "--in", "g.txt", "--p", "0.1", "--eta", "0.4", "--mode", "sampled"],
    ] {
        let o = cyclelab(&args, dir.path());
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap();
    }
    let o = cyclelab(&["expander", "dfs-partition", "--in", "g.txt"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verified"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cyclelab(&["oracle", "spectrum", "--in", "missing.txt"], dir.path()).status.code(), Some(3));
    assert_eq!(cyclelab(&["find-cycle", "--in", "g.txt", "--t", "5", "--eps", "x"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), r#"{"n": 20, "unknown_field": 1}"#).unwrap();
    let o = cyclelab(&["experiment", "turan", "--config", "bad.json", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("even.json"), r#"{"n": 20, "t": [10], "scenarios": ["b"], "p": 0.5}"#).unwrap();
    let o = cyclelab(&["experiment", "robustness", "--config", "even.json", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(cyclelab(&["gen", "gnp", "--n", "20", "--p", "0.3", "--out", "g.txt"], dir.path()).status.success());
    assert_eq!(cyclelab(&["find-cycle", "--in", "g.txt", "--t", "50"], dir.path()).status.code(), Some(2));
}

#[test]
fn experiment_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model": "gnp", "n": 300, "p": 0.1, "k": 4, "eps": "1/10", "trials": 3, "seed": 11,
                 "t": [30, 31], "deletions": ["random", "none"]}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    for out in ["a", "b"] {
        let o = cyclelab(&["experiment", "turan", "--config", "cfg.json", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/results.csv"), read("b/results.csv"));
    assert_eq!(read("a/summary.json"), read("b/summary.json"));
    let csv = String::from_utf8(read("a/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 2);
    let check = cyclelab::experiments::verify_report_dir(dir.path().join("a")).unwrap();
    assert!(check.failed.is_empty());
    assert!(check.checked > 0);
    for line in csv.lines().skip(1).filter(|l| l.contains(",success,")) {
        let cert = line.rsplit(',').next().unwrap();
        assert_eq!(read(&format!("a/{cert}")), read(&format!("b/{cert}")));
    }
}
