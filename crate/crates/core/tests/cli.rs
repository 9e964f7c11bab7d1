use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn condcop(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condcop"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn condcop")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(dir: &Path, out: &str, n: usize, seed: u64) {
    let o = condcop(dir, &["simulate", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
}

const SHORT: [&str; 4] = ["--iters", "300", "--burnin", "200"];

fn fit(dir: &Path, data: &str, out_dir: &str, extra: &[&str]) -> Output {
    let mut args = vec!["fit", "--data", data, "--out-dir", out_dir];
    args.extend_from_slice(&SHORT);
    args.extend_from_slice(extra);
    condcop(dir, &args)
}

#[test]
fn simulate_writes_requested_rows_deterministically() {
    let tmp = TempDir::new().unwrap();
    simulate(tmp.path(), "a.csv", 57, 3);
    simulate(tmp.path(), "b.csv", 57, 3);
    let a = fs::read_to_string(tmp.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(tmp.path().join("b.csv")).unwrap());
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "u,v,x");
    assert_eq!(lines.count(), 57);
    assert!(tmp.path().join("a.csv.meta.json").exists());
}

#[test]
fn simulate_with_custom_coefficients() {
    let tmp = TempDir::new().unwrap();
    let o = condcop(
        tmp.path(),
        &["simulate", "--family", "frank", "--calibration", "expbump", "--beta", "-0.5,0.1,1,2", "--n", "30", "--out", "f.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = fs::read_to_string(tmp.path().join("f.csv.meta.json")).unwrap();
    assert!(meta.contains("-0.5"), "{meta}");
}

#[test]
fn invalid_arguments_exit_with_validation_code() {
    let tmp = TempDir::new().unwrap();
    let o = condcop(tmp.path(), &["simulate", "--family", "clayton"]);
    assert_eq!(o.status.code(), Some(2));
    let o = condcop(tmp.path(), &["simulate", "--calibration", "quadratic", "--beta", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = condcop(tmp.path(), &["simulate", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = condcop(tmp.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_covariate_column_is_named() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.csv"), "y1,y2\n1,2\n3,4\n").unwrap();
    let o = condcop(tmp.path(), &["fit", "--data", "bad.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`x`"), "{}", stderr(&o));
}

#[test]
fn missing_data_file_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let o = condcop(tmp.path(), &["fit", "--data", "nope.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn too_few_rows_rejected() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("u,v,x\n");
    for i in 1..=9 {
        text.push_str(&format!("{},{},{}\n", i as f64 / 10.0, 1.0 - i as f64 / 10.0, i));
    }
    fs::write(tmp.path().join("small.csv"), text).unwrap();
    let o = condcop(tmp.path(), &["fit", "--data", "small.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_file_rejected() {
    let tmp = TempDir::new().unwrap();
    simulate(tmp.path(), "d.csv", 40, 1);
    fs::write(tmp.path().join("c.toml"), "iters = 100\nbogus = 1\n").unwrap();
    let o = condcop(tmp.path(), &["fit", "--data", "d.csv", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(tmp.path().join("c.toml"), "iters = 100\nburnin = 100\n").unwrap();
    let o = condcop(tmp.path(), &["fit", "--data", "d.csv", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_trace_rejected() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("t.csv"), "").unwrap();
    let o = condcop(tmp.path(), &["summarize", "--trace", "t.csv"]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(tmp.path().join("t.csv"), "iteration,d_star\n").unwrap();
    let o = condcop(tmp.path(), &["summarize", "--trace", "t.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_writes_outputs_and_replays_from_its_config() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    simulate(dir, "d.csv", 80, 4);
    let o = fit(dir, "d.csv", "r1", &["--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("Median"), "{stdout}");

    let r1 = dir.join("r1");
    for f in ["trace.csv", "tau_curve.csv", "components.csv", "summary.csv", "predictive.csv", "run.toml", "manifest.json"] {
        assert!(r1.join(f).exists(), "{f} missing");
    }
    let trace = fs::read_to_string(r1.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 100);
    let tau = fs::read_to_string(r1.join("tau_curve.csv")).unwrap();
    assert_eq!(tau.lines().count(), 1 + 21);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(r1.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["n"], 80);
    assert_eq!(manifest["chain_seed"], 7);
    assert_eq!(manifest["input_kind"], "pseudo");

    let o = condcop(dir, &["fit", "--data", "d.csv", "--config", "r1/run.toml", "--out-dir", "r2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace.csv", "tau_curve.csv", "components.csv", "predictive.csv"] {
        assert_eq!(fs::read(r1.join(f)).unwrap(), fs::read(dir.join("r2").join(f)).unwrap(), "{f} differs");
    }

    // summarizing the trace reproduces the summary written by the fit
    let o = condcop(dir, &["summarize", "--trace", "r1/trace.csv", "--out", "s.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(r1.join("summary.csv")).unwrap(), fs::read(dir.join("s.csv")).unwrap());
}

#[test]
fn raw_data_is_rank_transformed_and_predicted_on_data_scale() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let mut text = String::from("y1,y2,x\n");
    for i in 0..60 {
        let t = i as f64;
        text.push_str(&format!("{},{},{}\n", (t * 0.37).sin() * 10.0, (t * 0.37).sin() * 3.0 + (t * 1.3).cos(), 100.0 + t));
    }
    fs::write(dir.join("raw.csv"), text).unwrap();
    let o = fit(dir, "raw.csv", "r", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = fs::read_to_string(dir.join("r/manifest.json")).unwrap();
    assert!(manifest.contains("\"raw\""), "{manifest}");

    // tau curve is reported on the original covariate scale
    let tau = fs::read_to_string(dir.join("r/tau_curve.csv")).unwrap();
    let first_x: f64 = tau.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((first_x - 100.0).abs() < 1e-9, "{first_x}");

    let o = condcop(dir, &["predict", "--trace", "r/trace.csv", "--data", "raw.csv", "--out", "p.csv", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let pred = fs::read_to_string(dir.join("p.csv")).unwrap();
    let mut lines = pred.lines();
    assert_eq!(lines.next().unwrap(), "x,u,v,y1,y2");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 60);
    for r in rows {
        let cells: Vec<f64> = r.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[1] > 0.0 && cells[1] < 1.0);
        assert!(cells[3].abs() <= 10.0 + 1e-9);
    }
}

#[test]
fn predict_on_grid_without_data() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    simulate(dir, "d.csv", 50, 9);
    assert!(fit(dir, "d.csv", "r", &[]).status.success());
    let o = condcop(dir, &["predict", "--trace", "r/trace.csv", "--grid-points", "5", "--draws-per-x", "3", "--out", "g.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g = fs::read_to_string(dir.join("g.csv")).unwrap();
    assert_eq!(g.lines().count(), 1 + 15);
}

#[test]
fn several_chains_get_their_own_directories() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    simulate(dir, "d.csv", 40, 2);
    let o = fit(dir, "d.csv", "r", &["--chains", "2", "--seed", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = fs::read(dir.join("r/chain_1/trace.csv")).unwrap();
    let b = fs::read(dir.join("r/chain_2/trace.csv")).unwrap();
    assert_ne!(a, b);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("r/chain_2/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["chain_seed"], 11);

    // the second chain on its own reproduces the same bytes
    assert!(fit(dir, "d.csv", "solo", &["--seed", "11"]).status.success());
    assert_eq!(b, fs::read(dir.join("solo/trace.csv")).unwrap());
}
