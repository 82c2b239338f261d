use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn lava(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lava")).args(args).env("LAVA_THREADS", "1").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lava(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Deterministic pseudo-random regression data: y = 3 x1 + 0.3 (x2 + ... ) + noise.
fn write_data(dir: &Path, n: usize, p: usize) -> PathBuf {
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut text = String::from("y");
    for j in 0..p {
        text.push_str(&format!(",x{j}"));
    }
    text.push('\n');
    for _ in 0..n {
        let x: Vec<f64> = (0..p).map(|_| 2.0 * next()).collect();
        let y = 3.0 * x[0] + 0.3 * x[1..].iter().sum::<f64>() + 0.5 * next();
        text.push_str(&y.to_string());
        for v in &x {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    let path = dir.join("data.csv");
    fs::write(&path, text).unwrap();
    path
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    read_csv(path).iter().map(|r| r.iter().map(|c| c.parse().unwrap()).collect()).collect()
}

fn summary_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.split_once(" = ").filter(|(k, _)| *k == key).map(|(_, v)| v.to_string()))
        .unwrap_or_else(|| panic!("{key} missing from {text}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn huge_lambda1_gives_zero_sparse_part() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("tiny.csv");
    fs::write(&data, "y,a,b,c\n1,1,0,2\n2,0,1,1\n3,1,1,0\n4,2,1,1\n5,1,3,2\n").unwrap();
    let out = dir.path().join("coef.csv");
    ok(&["fit", s(&data), "--lambda1", "1e6", "--lambda2", "1", "--out", s(&out)]);
    for row in read_csv(&out) {
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[4], "false");
    }
}

#[test]
fn lava_at_infinite_ridge_reproduces_lasso() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 40, 8);
    let (a, b) = (dir.path().join("lava.csv"), dir.path().join("lasso.csv"));
    ok(&["fit", s(&data), "--estimator", "lava", "--lambda1", "0.2", "--lambda2", "inf", "--out", s(&a)]);
    ok(&["fit", s(&data), "--estimator", "lasso", "--lambda1", "0.2", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn coefficients_reproduce_fitted_values() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 30, 6);
    let coef = dir.path().join("coef.csv");
    let fitted = dir.path().join("fitted.csv");
    let summary = ok(&[
        "fit",
        s(&data),
        "--lambda1",
        "0.1",
        "--lambda2",
        "0.5",
        "--out",
        s(&coef),
        "--fitted",
        s(&fitted),
        "--sigma2",
        "0.25",
    ]);
    assert!(summary_value(&summary, "sure").parse::<f64>().is_ok());
    assert!(summary_value(&summary, "df").parse::<f64>().unwrap() > 0.0);
    let theta: Vec<f64> = read_csv(&coef).iter().map(|r| r[3].parse().unwrap()).collect();
    let rows = data_rows(&data);
    let fit = data_rows(&fitted);
    for (row, f) in rows.iter().zip(&fit) {
        let refit: f64 = row[1..].iter().zip(&theta).map(|(x, t)| x * t).sum();
        assert!((refit - f[1]).abs() < 1e-8, "{refit} vs {}", f[1]);
    }
    // Metadata echo carries the effective settings.
    let meta = fs::read_to_string(dir.path().join("coef.csv.meta")).unwrap();
    for key in ["estimator = lava", "normalize = true", "tol = ", "max_iter = ", "column_scales = "] {
        assert!(meta.contains(key), "{key} missing from metadata");
    }
}

#[test]
fn default_lambda1_is_recorded() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 40, 8);
    let out = dir.path().join("coef.csv");
    ok(&["fit", s(&data), "--lambda2", "1", "--sigma2", "0.04", "--out", s(&out)]);
    let meta = fs::read_to_string(dir.path().join("coef.csv.meta")).unwrap();
    assert!(meta.contains("lambda1_rule = "));
    let l1: f64 = summary_value(&meta, "lambda1").parse().unwrap();
    assert!(l1 > 0.0 && l1.is_finite());
}

#[test]
fn malformed_csv_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "y,a,b\n1,2,3\n4,oops,6\n7,8,9\n").unwrap();
    let out = lava(&["fit", s(&data), "--lambda1", "1", "--lambda2", "1", "--out", s(&dir.path().join("c.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("column 2"), "{err}");

    fs::write(&data, "y,a,b\n1,2,3\n4,5\n").unwrap();
    let out = lava(&["fit", s(&data), "--lambda1", "1", "--lambda2", "1", "--out", s(&dir.path().join("c.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn bad_flags_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 20, 4);
    let out = s(&dir.path().join("c.csv")).to_string();
    assert_eq!(lava(&["fit", s(&data), "--lambda2", "-1", "--out", &out]).status.code(), Some(2));
    assert_eq!(lava(&["fit", s(&data), "--estimator", "ridge", "--out", &out]).status.code(), Some(2));
    assert_eq!(lava(&["fit", s(&data), "--estimator", "nonsense", "--out", &out]).status.code(), Some(2));
    assert_eq!(lava(&["simulate", "--set", "reps=0", "--out-dir", s(dir.path())]).status.code(), Some(2));
}

#[test]
fn non_convergence_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 30, 10);
    let out = lava(&[
        "fit",
        s(&data),
        "--lambda1",
        "0.001",
        "--lambda2",
        "0.01",
        "--max-iter",
        "1",
        "--out",
        s(&dir.path().join("c.csv")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kkt residual"));
}

#[test]
fn no_normalize_changes_scales() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 30, 4);
    let a = ok(&["fit", s(&data), "--lambda1", "0.1", "--lambda2", "1", "--out", s(&dir.path().join("a.csv"))]);
    let b = ok(&[
        "fit",
        s(&data),
        "--no-normalize",
        "--lambda1",
        "0.1",
        "--lambda2",
        "1",
        "--out",
        s(&dir.path().join("b.csv")),
    ]);
    assert_ne!(summary_value(&a, "column_scales"), summary_value(&b, "column_scales"));
    assert!(summary_value(&b, "column_scales").split(',').all(|v| v == "1"));
}

#[test]
fn cv_tuning_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 40, 10);
    let grid = "lambda1=0.01:1:6;lambda2=0.01:10:5";
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let sa = ok(&["tune", s(&data), "--method", "cv", "--seed", "7", "--grid-spec", grid, "--out", s(&a)]);
    let sb = ok(&["tune", s(&data), "--method", "cv", "--seed", "7", "--grid-spec", grid, "--out", s(&b)]);
    assert_eq!(sa, sb);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn surface_minimum_is_the_reported_choice() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 40, 10);
    let out = dir.path().join("surface.csv");
    let summary = ok(&[
        "tune",
        s(&data),
        "--sigma2",
        "0.02",
        "--grid-spec",
        "lambda1=0.01:1:6;lambda2=0.01:10:5",
        "--out",
        s(&out),
    ]);
    let rows = read_csv(&out);
    let best =
        rows.iter().min_by(|a, b| a[3].parse::<f64>().unwrap().total_cmp(&b[3].parse::<f64>().unwrap())).unwrap();
    assert_eq!(best[1], summary_value(&summary, "chosen_lambda1"));
    assert_eq!(best[2], summary_value(&summary, "chosen_lambda2"));
}

#[test]
fn estimated_noise_reproduces_choice_when_given() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 40, 10);
    let grid = "lambda1=0.01:1:6;lambda2=0.01:10:5";
    let a = dir.path().join("a.csv");
    let first = ok(&["tune", s(&data), "--grid-spec", grid, "--out", s(&a)]);
    let meta = fs::read_to_string(dir.path().join("a.csv.meta")).unwrap();
    assert_eq!(summary_value(&meta, "sigma2_source"), "estimated");
    let sigma2 = summary_value(&meta, "sigma2");
    let b = dir.path().join("b.csv");
    let second = ok(&["tune", s(&data), "--grid-spec", grid, "--sigma2", &sigma2, "--out", s(&b)]);
    assert_eq!(summary_value(&first, "chosen_lambda1"), summary_value(&second, "chosen_lambda1"));
    assert_eq!(summary_value(&first, "chosen_lambda2"), summary_value(&second, "chosen_lambda2"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn risk_curve_plug_in_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("risk.csv");
    ok(&[
        "risk-curve",
        "--model-spec",
        "p=100,sigma=0.1",
        "--penalty-policy",
        "plugin",
        "--q-grid",
        "0:2:0.5",
        "--out",
        s(&out),
    ]);
    let rows = read_csv(&out);
    let risk = |est: &str, q: &str| -> f64 {
        rows.iter().find(|r| r[1] == est && r[2] == q).map(|r| r[3].parse().unwrap()).unwrap()
    };
    for q in ["0", "0.5", "1", "1.5", "2"] {
        assert!(risk("lava", q) <= risk("lasso", q) && risk("lava", q) <= risk("ridge", q), "q = {q}");
    }
    let meta = fs::read_to_string(dir.path().join("risk.csv.meta")).unwrap();
    assert!(meta.contains("tuning = plugin") && meta.contains("config_hash = "));
}

#[test]
fn simulate_is_byte_identical_and_echoes_config() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("sim.cfg");
    fs::write(
        &cfg,
        "scenario = regression\nn = 30\np = 40\nreps = 3\nq_grid = 0,1\ngrid_lambda1 = 5\ngrid_lambda2 = 5\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["simulate", "--config", s(&cfg), "--out-dir", s(&a)]);
    ok(&["simulate", "--config", s(&cfg), "--set", "seed=1", "--out-dir", s(&b)]);
    assert_eq!(fs::read(a.join("results.csv")).unwrap(), fs::read(b.join("results.csv")).unwrap());
    let meta = fs::read_to_string(a.join("results.csv.meta")).unwrap();
    for key in ["n = 30", "tuning = sure", "noise = known", "config_hash = "] {
        assert!(meta.contains(key), "{key} missing");
    }
    let header = fs::read_to_string(a.join("results.csv")).unwrap();
    assert!(header.starts_with("scenario,estimator,q,risk,se,reps,failures,lambda1_mean,lambda2_mean"));
}

#[test]
fn bounds_report() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path(), 40, 6);
    let beta0 = dir.path().join("beta0.csv");
    fs::write(&beta0, "beta0\n0\n0.3\n0.3\n0.3\n0.3\n0.3\n").unwrap();
    let out = dir.path().join("bounds.csv");
    ok(&[
        "bounds",
        s(&data),
        "--lambda2",
        "1",
        "--beta0",
        s(&beta0),
        "--sigma-u",
        "0.3",
        "--support",
        "0",
        "--reps",
        "500",
        "--out",
        s(&out),
    ]);
    let rows = read_csv(&out);
    let get = |k: &str| -> f64 { rows.iter().find(|r| r[0] == k).unwrap()[1].parse().unwrap() };
    assert!(get("b4") <= 8.0 * get("b2") * get("norm_k") + 1e-12);
    assert!(get("lambda1_quantile") <= get("lambda_bar"));
    assert!(get("bound_total") > 0.0);
    let again = dir.path().join("again.csv");
    ok(&[
        "bounds",
        s(&data),
        "--lambda2",
        "1",
        "--beta0",
        s(&beta0),
        "--sigma-u",
        "0.3",
        "--support",
        "0",
        "--reps",
        "500",
        "--out",
        s(&again),
    ]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_lava"))
        .args(["risk-curve", "--out", "/dev/null"])
        .env("LAVA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
