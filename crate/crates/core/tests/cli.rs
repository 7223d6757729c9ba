use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hedgefw::harness::experiment::{parse_records, strip_timing, CSV_HEADER};
use hedgefw::harness::ExperimentConfig;

fn hedgefw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hedgefw")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn print_config_round_trips() {
    let text = ok(&hedgefw(&[
        "run",
        "--print-config",
        "--n",
        "40",
        "--p",
        "90",
        "--design",
        "toeplitz_correlated",
        "--rho",
        "0.5",
        "--set",
        "eta=0.25",
    ]));
    let cfg = ExperimentConfig::parse_str(&text).unwrap();
    assert_eq!((cfg.spec.n, cfg.spec.p), (40, 90));
    assert_eq!(cfg.eta, Some(0.25));
    assert_eq!(cfg.to_config_text(), text);
}

#[test]
fn full_scale_sets_trials() {
    let text = ok(&hedgefw(&[
        "run",
        "--print-config",
        "--n",
        "10",
        "--p",
        "10",
        "--full-scale",
    ]));
    assert!(text.lines().any(|l| l.replace(' ', "") == "trials=1000"), "{text}");
    let text = ok(&hedgefw(&[
        "run",
        "--print-config",
        "--n",
        "10",
        "--p",
        "10",
        "--paper-scale",
        "--trials",
        "3",
    ]));
    assert!(text.lines().any(|l| l.replace(' ', "") == "trials=3"), "{text}");
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n = 10\np = 10\nlearning_rate = 3\n").unwrap();
    let out = hedgefw(&["run", "--config", path(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));

    let out = hedgefw(&["run", "--n", "10", "--p", "10", "--s0", "11", "--print-config"]);
    assert!(!out.status.success());
    let out = hedgefw(&["run", "--n", "10", "--p", "10", "--set", "threads"]);
    assert!(!out.status.success());
    let out = hedgefw(&["run", "--p", "10", "--print-config"]);
    assert!(!out.status.success());
}

#[test]
fn run_writes_records_summary_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let stdout = ok(&hedgefw(&[
        "run",
        "--n",
        "30",
        "--p",
        "50",
        "--trials",
        "5",
        "--grid-size",
        "6",
        "--threads",
        "2",
        "--output-dir",
        path(&out_dir),
    ]));
    assert!(stdout.contains("hedge_fw_aggregate"));
    let csv = fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    let records = parse_records(&csv).unwrap();
    assert_eq!(records.len(), 15);
    assert!(records.iter().all(|r| r.is_ok()));
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("cv_lasso"));
    for svg in ["pred_error.svg", "wall_time_s.svg"] {
        let text = fs::read_to_string(out_dir.join(svg)).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        let groups = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("histogram"))
            .count();
        assert_eq!(groups, 3);
    }

    let replot = dir.path().join("replot");
    let listed = ok(&hedgefw(&[
        "plot",
        path(&out_dir.join("records.csv")),
        "--out-dir",
        path(&replot),
    ]));
    assert_eq!(listed.lines().count(), 2);
    assert_eq!(
        fs::read_to_string(replot.join("pred_error.svg")).unwrap(),
        fs::read_to_string(out_dir.join("pred_error.svg")).unwrap()
    );
}

#[test]
fn thread_count_does_not_change_records() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        ok(&hedgefw(&[
            "run",
            "--n",
            "25",
            "--p",
            "40",
            "--trials",
            "9",
            "--grid-size",
            "5",
            "--seed",
            "5",
            "--emit-svg",
            "false",
            "--threads",
            threads,
            "--output-dir",
            path(&out),
        ]));
        strip_timing(&fs::read_to_string(out.join("records.csv")).unwrap())
    };
    let one = run("1", "a");
    assert_eq!(one, run("8", "b"));
    assert_eq!(one, run("1", "c"));
    assert_eq!(one.lines().count(), 1 + 27);
}

#[test]
fn gen_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("inst.txt");
    ok(&hedgefw(&[
        "gen",
        "--n",
        "40",
        "--p",
        "30",
        "--s0",
        "3",
        "--seed",
        "9",
        "--trial",
        "2",
        "--out",
        path(&file),
    ]));
    let again = ok(&hedgefw(&[
        "gen", "--n", "40", "--p", "30", "--s0", "3", "--seed", "9", "--trial", "2",
    ]));
    assert_eq!(fs::read_to_string(&file).unwrap(), again);

    let report = ok(&hedgefw(&["solve", path(&file), "--grid-size", "8"]));
    for key in [
        "radii:",
        "hedge_weights:",
        "hedge_fw_aggregate:",
        "hedge_fw_select:",
        "cv_lasso:",
        "cv_best_lambda=",
        "pred_error cv_lasso=",
    ] {
        assert!(report.contains(key), "missing {key} in\n{report}");
    }
    let weights: Vec<f64> = report
        .lines()
        .find_map(|l| l.strip_prefix("hedge_weights: "))
        .unwrap()
        .split(' ')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(weights.len(), 8);
    assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let out = hedgefw(&["solve", path(&dir.path().join("missing.txt"))]);
    assert!(!out.status.success());
    fs::write(dir.path().join("junk.txt"), "not an instance\n").unwrap();
    let out = hedgefw(&["solve", path(&dir.path().join("junk.txt"))]);
    assert!(!out.status.success());
}
