use std::fs;
use std::process::{Command, Output};

use qrep_cli::commands::{cmd_enumerate, cmd_run};
use qrep_cli::config::{ConfigDocument, Overrides};
use serde_json::Value;

fn qrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrep"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

#[test]
fn exit_codes() {
    assert_eq!(code(&qrep(&["run", "--d", "3", "--n", "2"])), 0);
    assert_eq!(code(&qrep(&["enumerate", "--d", "2", "--n", "3"])), 0);
    assert_eq!(code(&qrep(&["--help"])), 0);

    let bad_noise = qrep(&["run", "--d", "2", "--noise", "0.5,0.4"]);
    assert_eq!(code(&bad_noise), 1);
    assert!(String::from_utf8_lossy(&bad_noise.stderr).contains("noise.probs"));
    assert_eq!(code(&qrep(&["run", "--d", "17"])), 1);
    assert_eq!(code(&qrep(&["run", "--trials", "0"])), 1);
    assert_eq!(code(&qrep(&["run", "--state", "basis:3", "--d", "3"])), 1);
    assert_eq!(code(&qrep(&["run", "--mode", "sideways"])), 1);
    assert_eq!(code(&qrep(&["frobnicate"])), 1);

    let too_big = qrep(&["enumerate", "--d", "3", "--n", "8"]);
    assert_eq!(code(&too_big), 2);
    assert!(String::from_utf8_lossy(&too_big.stderr).contains("qrep run --trials"));
}

#[test]
fn selftest_and_negative_control() {
    let ok = qrep(&["selftest"]);
    assert_eq!(code(&ok), 0);
    let text = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 9);

    let bad = qrep(&["selftest", "--corrupt-hadamard"]);
    assert_eq!(code(&bad), 3);
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL unitarity_sweep")));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unitarity_sweep"));
}

#[test]
fn config_file_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    let out = dir.path().join("report.json");
    let hist = dir.path().join("history.csv");
    fs::write(
        &cfg,
        r#"{"d": 3, "n": 2, "mode": "local", "seed": 11, "trials": 5,
            "initial_state": [[0.6, 0], [0, 0.8], [0, 0]]}"#,
    )
    .unwrap();
    let run = qrep(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "7",
        "--out",
        out.to_str().unwrap(),
        "--history",
        hist.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(run.stdout.is_empty());

    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["command"], "run");
    assert_eq!(report["config"]["trials"], 7);
    assert_eq!(report["config"]["seed"], 11);
    assert_eq!(report["trials"].as_array().unwrap().len(), 7);
    assert_eq!(report["aggregate"]["histogram_total"], 14);
    let amp = &report["initial_state"][1];
    assert!(amp[1].as_f64().unwrap() == 0.8);
    for t in report["trials"].as_array().unwrap() {
        assert!((t["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(t.get("deferred_exponent").is_none());
    }

    let csv = fs::read_to_string(&hist).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "hop,r,index,re,im");
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert!(lines[1..4].iter().all(|l| l.starts_with("0,0,")));

    let missing = qrep(&[
        "run",
        "--config",
        dir.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_ne!(code(&missing), 0);
}

#[test]
fn reproducible_across_invocations() {
    let args = [
        "run",
        "--d",
        "5",
        "--n",
        "3",
        "--noise",
        "0.6,0.1,0.1,0.1,0.1",
        "--trials",
        "300",
        "--seed",
        "77",
        "--state",
        "random",
    ];
    let a = qrep(&args);
    let b = qrep(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = qrep(&[
        "run",
        "--d",
        "5",
        "--n",
        "3",
        "--noise",
        "0.6,0.1,0.1,0.1,0.1",
        "--trials",
        "300",
        "--seed",
        "78",
        "--state",
        "random",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

/// Monte Carlo frequencies of each path's first outcome against the exact
/// enumeration, using a chi-square statistic over d^n cells.
#[test]
fn run_frequencies_match_enumeration() {
    let doc = |trials: u64| {
        ConfigDocument::from_json(&format!(
            r#"{{"d": 3, "n": 2, "noise": {{"probs": [0.5, 0.3, 0.2]}}, "trials": {trials}, "seed": 4}}"#
        ))
        .unwrap()
        .resolve(&Overrides::default())
        .unwrap()
    };
    let trials = 10_000u64;
    let run = cmd_run(&doc(trials)).unwrap();
    let exact = cmd_enumerate(&doc(1)).unwrap();

    let cell = |r: &[usize]| r[0] * 3 + r[1];
    let mut expected = [0.0f64; 9];
    for p in &exact.paths {
        expected[cell(&p.results)] += p.probability;
    }
    let mut observed = [0u64; 9];
    for t in &run.trials {
        observed[cell(&t.results)] += 1;
    }
    let chi2: f64 = (0..9)
        .map(|k| {
            let e = expected[k] * trials as f64;
            (observed[k] as f64 - e).powi(2) / e
        })
        .sum();
    // 8 degrees of freedom; 26.12 is the 0.999 quantile.
    assert!(chi2 < 26.12, "chi-square {chi2}, observed {observed:?}");

    // Expected fidelity from enumeration against the Monte Carlo mean.
    let diff = (run.aggregate.mean_fidelity - exact.aggregate.mean_fidelity).abs();
    assert!(
        diff < 0.02,
        "{} vs {}",
        run.aggregate.mean_fidelity,
        exact.aggregate.mean_fidelity
    );
}
