use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hybridcast::arima::ArmaParams;
use hybridcast::garch::GarchParams;
use hybridcast::simulate::{gaussian_noise, simulate_garch};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridcast"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_values(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let mut text = String::from("date,value\n");
    for (i, v) in values.iter().enumerate() {
        text.push_str(&format!("{i:04},{v}\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

fn benchmark_csv(dir: &Path) -> PathBuf {
    let path = dir.join("bench.csv");
    let o = run(&["simulate", "--n", "300", "--seed", "4", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

/// Small LSTMs so the end-to-end runs stay quick.
const FAST: [&str; 10] = [
    "--order",
    "1,0,1",
    "--garch",
    "1,1",
    "--epochs",
    "20",
    "--hidden",
    "4",
    "--lookback",
    "5",
];

#[test]
fn single_model_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let input = benchmark_csv(dir.path());
    let out = dir.path().join("out");
    let mut args = vec![
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(["--models", "ag", "--split", "0.9", "--subsets", "7,14,21"]);
    args.extend(FAST);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("first 21 test points"));

    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["models"], serde_json::json!(["ag"]));
    let models = report["models"].as_object().unwrap();
    assert_eq!(models.len(), 1);
    for len in ["7", "14", "21"] {
        let m = &models["ag"]["subsets"][len];
        let (mse, rmse) = (m["mse"].as_f64().unwrap(), m["rmse"].as_f64().unwrap());
        assert!((rmse * rmse - mse).abs() <= 1e-12 * mse.max(1.0));
        assert!(m["mae"].is_f64() && m.get("mape_percent").is_some());
    }
    assert_eq!(report["diagnostics"]["test_length"], 30);
    assert_eq!(report["diagnostics"]["failed_refits"]["ag"], 0);

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("index,date,actual,ag,lag_one"));
    assert_eq!(lines.count(), 30);
    assert!(fs::read_to_string(out.join("metrics.txt")).unwrap().contains("MAPE(%)"));
}

#[test]
fn evaluate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = benchmark_csv(dir.path());
    let out = dir.path().join("out");
    let mut args = vec![
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(["--split", "0.9", "--subsets", "10,30", "--seed", "3"]);
    args.extend(FAST);
    let first = run(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    let report = fs::read(out.join("report.json")).unwrap();
    let trace = fs::read(out.join("trace.csv")).unwrap();
    let second = run(&args);
    assert!(second.status.success());
    assert_eq!(report, fs::read(out.join("report.json")).unwrap());
    assert_eq!(trace, fs::read(out.join("trace.csv")).unwrap());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = benchmark_csv(dir.path());
    let out = dir.path().join("out");
    let config = dir.path().join("run.cfg");
    fs::write(
        &config,
        format!(
            "# benchmark run\ninput = {}\nsplit = 0.8\nmodels = ag\nsubsets = 5\norder = 1,0,1\ngarch = none\nout = {}\n",
            input.display(),
            out.display()
        ),
    )
    .unwrap();
    let o = run(&["evaluate", "--config", config.to_str().unwrap(), "--split", "0.9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["train_fraction"], 0.9);
    assert_eq!(report["config"]["garch"], "none");
    assert_eq!(report["models"]["ag"]["structure"], "ARIMA(1,0,1)");

    fs::write(&config, "split = 0.8\nwindow = 3\n").unwrap();
    let o = run(&["evaluate", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("unknown key \"window\""), "{}", stderr(&o));
}

#[test]
fn errors_go_to_stderr_with_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = run(&["stationarity", "--input", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    assert!(stdout(&o).is_empty());

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "date,value\n").unwrap();
    let o = run(&["stationarity", "--input", empty.to_str().unwrap()]);
    assert!(stderr(&o).contains("no data rows"), "{}", stderr(&o));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,value\n1,1.0\n2,2.0\n3,oops\n").unwrap();
    let o = run(&["stationarity", "--input", bad.to_str().unwrap()]);
    assert!(stderr(&o).contains(":4:"), "{}", stderr(&o));

    let o = run(&["evaluate", "--input", bad.to_str().unwrap(), "--models", "ag,arima"]);
    assert!(stderr(&o).contains("unknown model"), "{}", stderr(&o));
}

#[test]
fn stationarity_on_white_noise() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_values(dir.path(), "noise.csv", &gaussian_noise(300, 8));
    let o = run(&["stationarity", "--input", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let level_adf = text.lines().find(|l| l.starts_with("ADF (level)")).unwrap();
    assert!(level_adf.ends_with("reject at 5%: yes"), "{text}");
}

#[test]
fn fit_on_arma_garch_passes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let arma = ArmaParams::new(0.0, vec![0.5], vec![0.3], 1.0).unwrap();
    let garch = GarchParams::new(0.1, vec![0.2], vec![0.7]).unwrap();
    let y = simulate_garch(&arma, &garch, 1500, 21).unwrap();
    let input = write_values(dir.path(), "ag.csv", y.values());
    let out = dir.path().join("fit");
    let o = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--order",
        "1,0,1",
        "--garch",
        "1,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert!(report["diagnostics"]["ljung_box"]["p_value"].as_f64().unwrap() > 0.05);
    assert!(report["diagnostics"]["arch_lm"]["p_value"].as_f64().unwrap() > 0.05);
    assert_eq!(report["orders"]["arima_selected"], false);
    assert!(stdout(&o).contains("ARIMA(1,0,1)-GARCH(1,1)"));

    let o = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--order",
        "2,0,2",
        "--garch",
        "1,1",
        "--max-iter",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("did not converge"), "{}", stderr(&o));
}

#[test]
fn fit_selects_orders_when_not_given() {
    let dir = tempfile::tempdir().unwrap();
    let arma = ArmaParams::new(0.0, vec![0.6], vec![], 1.0).unwrap();
    let garch = GarchParams::new(0.1, vec![0.2], vec![0.7]).unwrap();
    let y = simulate_garch(&arma, &garch, 600, 5).unwrap();
    let input = write_values(dir.path(), "ar.csv", y.values());
    let out = dir.path().join("fit");
    let o = run(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--config",
        "/dev/null",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(report["orders"]["arima_selected"], true);
    assert_eq!(report["orders"]["garch_selected"], true);
    assert_eq!(report["orders"]["arima"]["d"], 0);
}
