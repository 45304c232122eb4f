use std::fs;
use std::process::{Command, Output};

const HEADER: &str = "model,mean_test_mse,std_test_mse,train_mse,storage_scalars,mean_query_us";

fn aslm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aslm")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: &[&str] = &[
    "--train-len", "200", "--test-len", "100", "--stride", "25", "--runs", "3", "--codebook-size", "60",
];

fn small_run(extra: &[&str]) -> Output {
    let mut args = vec!["run", "--format", "csv", "--no-timing"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    aslm(&args)
}

#[test]
fn generate_writes_one_value_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    stdout(&aslm(&["generate", "--samples", "300", "--normalize", "--out", path.to_str().unwrap()]));
    let text = fs::read_to_string(&path).unwrap();
    let values: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 300);
    let mean = values.iter().sum::<f64>() / 300.0;
    assert!(mean.abs() < 1e-9);
}

#[test]
fn csv_report_has_exact_header_and_roster_rows() {
    let text = stdout(&small_run(&["--models", "LS,KNN,ASLM"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    let models: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(models, ["LS", "KNN", "ASLM"]);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 6);
        assert!(line.ends_with(",nan"));
    }
}

#[test]
fn untimed_output_is_reproducible() {
    let a = stdout(&small_run(&["--noisy"]));
    let b = stdout(&small_run(&["--noisy"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 9);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    fs::write(&cfg, "# test config\nseed = 7\ndelta = 0.5\nmodels = LS\n").unwrap();
    let text = stdout(&aslm(&["run", "--print-config", "--config", cfg.to_str().unwrap(), "--delta", "0.25"]));
    assert!(text.lines().any(|l| l.replace(' ', "") == "seed=7"), "{text}");
    assert!(text.lines().any(|l| l.replace(' ', "") == "delta=0.25"), "{text}");
    assert!(text.lines().any(|l| l.replace(' ', "") == "models=LS"), "{text}");
}

#[test]
fn bad_input_fails_cleanly() {
    for args in [
        vec!["run", "--format", "xml"],
        vec!["run", "--models", "SVM"],
        vec!["run", "--runs", "0"],
        vec!["run", "--config", "/nonexistent/exp.conf"],
    ] {
        let out = aslm(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn tune_epsilon_hits_target_size() {
    let mut args = vec!["tune-epsilon"];
    args.extend_from_slice(SMALL);
    let text = stdout(&aslm(&args));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epsilon,codebook_size,exact");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert!(fields[0].parse::<f64>().unwrap() > 0.0);
    assert_eq!(fields[1], "60");
    assert_eq!(fields[2], "true");
}
