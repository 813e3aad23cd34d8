//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any gating criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hybridcast::arima::{fit_arima, ArimaOrder, ArmaParams};
use hybridcast::eval::{
    compare, metrics, rolling_one_step, ArmaGarchForecaster, ComparisonReport, DecompositionForecaster, Forecaster,
    LstmForecaster, MetricsReport, RandomWalk, StatFeatureForecaster,
};
use hybridcast::garch::{fit_garch, GarchOrder, GarchParams};
use hybridcast::lstm::{backward, forward, init, make_windows, train, LstmConfig, LstmParams};
use hybridcast::series::{difference, integrate, train_test_split};
use hybridcast::simulate::{benchmark_series, gaussian_noise, random_walk, simulate_arma, simulate_garch};
use hybridcast::stats::{adf_test, arch_lm_test, kpss_test, ljung_box_test, LagOrder};
use hybridcast::TimeSeries;
use serde_json::Value;

type Criterion = (&'static str, fn(&mut Suite));

struct Suite {
    failed: Vec<String>,
    /// Every metrics report produced during the run, for the rmse² = mse check.
    reports: Vec<MetricsReport>,
    /// Every structure trace seen, as (label, structures per step).
    structures: Vec<(String, Vec<String>)>,
}

impl Suite {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> (bool, String) {
    let ok = elapsed < Duration::from_secs(limit_secs);
    (ok, format!("runtime {:.1}s < {limit_secs}s", elapsed.as_secs_f64()))
}

fn differencing_round_trip(s: &mut Suite) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..1000u64 {
        let n = 20 + (seed as usize % 181);
        let values: Vec<f64> = if seed % 2 == 0 {
            random_walk(n, seed)
        } else {
            gaussian_noise(n, seed)
        };
        let series = TimeSeries::new(values).unwrap();
        for d in [1, 2] {
            let back = integrate(&difference(&series, d).unwrap()).unwrap();
            for (a, b) in back.values().iter().zip(series.values()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let (fast, time) = within(start.elapsed(), 1);
    s.record(
        "1",
        worst <= 1e-12 && fast,
        format!("difference/integrate round trip, 1000 unit-scale series (N(0,1) noise and random walks, n=20..200), d in {{1,2}}: max abs error {worst:.2e} <= 1e-12; {time}"),
    );
}

fn simulation_recovery(s: &mut Suite) {
    let start = Instant::now();
    let seeds = 0..10u64;
    let n = 5000;
    let in_band = |v: f64, lo: f64, hi: f64| (lo..=hi).contains(&v);

    let ar = ArmaParams::new(0.0, vec![0.6], vec![], 1.0).unwrap();
    let ar_hits = seeds
        .clone()
        .filter(|&seed| {
            let y = simulate_arma(&ar, n, 1000 + seed).unwrap();
            let m = fit_arima(&y, ArimaOrder::new(1, 0, 0).unwrap()).unwrap();
            in_band(m.params.alphas[0], 0.52, 0.68)
        })
        .count();

    let ma = ArmaParams::new(0.0, vec![], vec![0.5], 1.0).unwrap();
    let ma_hits = seeds
        .clone()
        .filter(|&seed| {
            let y = simulate_arma(&ma, n, 2000 + seed).unwrap();
            let m = fit_arima(&y, ArimaOrder::new(0, 0, 1).unwrap()).unwrap();
            in_band(m.params.thetas[0], 0.42, 0.58)
        })
        .count();

    let white = ArmaParams::new(0.0, vec![], vec![], 1.0).unwrap();
    let g = GarchParams::new(0.1, vec![0.2], vec![0.7]).unwrap();
    let garch_hits = seeds
        .filter(|&seed| {
            let u = simulate_garch(&white, &g, n, 3000 + seed).unwrap();
            let f = fit_garch(u.values(), GarchOrder::new(1, 1).unwrap()).unwrap();
            in_band(f.params.w, 0.05, 0.2)
                && in_band(f.params.lambdas[0], 0.12, 0.28)
                && in_band(f.params.betas[0], 0.6, 0.8)
        })
        .count();

    let (fast, time) = within(start.elapsed(), 30);
    s.record(
        "2",
        ar_hits >= 9 && ma_hits >= 9 && garch_hits >= 9 && fast,
        format!(
            "parameter recovery at n=5000 (need >= 9/10 each): AR(1) in [0.52,0.68] {ar_hits}/10, \
             MA(1) in [0.42,0.58] {ma_hits}/10, GARCH(1,1) w in [0.05,0.2], lambda in [0.12,0.28], \
             beta in [0.6,0.8] {garch_hits}/10; {time}"
        ),
    );
}

fn test_calibration(s: &mut Suite) {
    let start = Instant::now();
    let n = 500;
    let seeds = 200u64;
    let rate = |hits: usize| hits as f64 / seeds as f64;
    let (mut lb, mut arch, mut adf_walk, mut adf_ar) = (0, 0, 0, 0);
    let ar = ArmaParams::new(0.0, vec![0.5], vec![], 1.0).unwrap();
    for seed in 0..seeds {
        let x = gaussian_noise(n, 10_000 + seed);
        lb += usize::from(ljung_box_test(&x, 10, 0).unwrap().reject_at_5pct);
        arch += usize::from(arch_lm_test(&x, 5).unwrap().reject_at_5pct);
        adf_walk += usize::from(
            adf_test(&random_walk(n, 20_000 + seed), LagOrder::Auto)
                .unwrap()
                .reject_at_5pct,
        );
        let y = simulate_arma(&ar, n, 30_000 + seed).unwrap();
        adf_ar += usize::from(adf_test(y.values(), LagOrder::Auto).unwrap().reject_at_5pct);
    }
    let band = |r: f64| (0.01..=0.12).contains(&r);
    let (fast, time) = within(start.elapsed(), 60);
    s.record(
        "3",
        band(rate(lb)) && band(rate(arch)) && rate(adf_walk) <= 0.12 && rate(adf_ar) >= 0.80 && fast,
        format!(
            "200 seeds, n=500: Ljung-Box size {:.1}% and ARCH-LM size {:.1}% in [1%,12%]; \
             ADF rejects random walks {:.1}% <= 12%, AR(0.5) {:.1}% >= 80%; {time}",
            100.0 * rate(lb),
            100.0 * rate(arch),
            100.0 * rate(adf_walk),
            100.0 * rate(adf_ar)
        ),
    );
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn reference_agreement(s: &mut Suite) {
    let names = ["white_noise", "random_walk", "ar1", "garch", "sine_trend"];
    let mut worst = 0.0f64;
    let mut problems = Vec::new();
    for name in names {
        let path = fixtures_dir().join(format!("{name}.json"));
        let fixture: Value = match std::fs::read_to_string(&path).map(|t| serde_json::from_str(&t)) {
            Ok(Ok(v)) => v,
            _ => {
                problems.push(format!("cannot read {}", path.display()));
                continue;
            }
        };
        let x: Vec<f64> = fixture["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let stat = |key: &str| fixture[key]["statistic"].as_f64().unwrap();
        let lag = |key: &str| fixture[key]["lag"].as_u64().unwrap() as usize;
        let ours = [
            ("adf", adf_test(&x, LagOrder::Auto).map(|r| r.statistic)),
            ("kpss", kpss_test(&x).map(|r| r.statistic)),
            (
                "ljung_box",
                ljung_box_test(&x, lag("ljung_box"), 0).map(|r| r.statistic),
            ),
            ("arch_lm", arch_lm_test(&x, lag("arch_lm")).map(|r| r.statistic)),
        ];
        for (key, value) in ours {
            match value {
                Ok(v) => worst = worst.max((v - stat(key)).abs()),
                Err(e) => problems.push(format!("{name}/{key}: {e}")),
            }
        }
    }
    s.record(
        "4",
        problems.is_empty() && worst <= 1e-6,
        format!(
            "ADF, KPSS, Ljung-Box, ARCH-LM vs frozen reference values on 5 series: max abs diff {worst:.2e} <= 1e-6{}",
            if problems.is_empty() {
                String::new()
            } else {
                format!("; {}", problems.join("; "))
            }
        ),
    );
}

fn half_squared_error(p: &LstmParams, window: &[Vec<f64>], target: f64) -> f64 {
    let d = forward(p, window).unwrap().prediction - target;
    0.5 * d * d
}

fn gradient_check(s: &mut Suite) {
    let start = Instant::now();
    let step = 1e-3;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for seed in 0..5u64 {
        for k in [1, 4, 10] {
            let config = LstmConfig {
                input_dim: 2,
                hidden_size: 3,
                lookback_k: k,
                seed,
                ..LstmConfig::default()
            };
            let mut p = init(&config).unwrap();
            let noise = gaussian_noise(2 * k + 1, 500 + seed);
            let window: Vec<Vec<f64>> = noise[..2 * k].chunks(2).map(<[f64]>::to_vec).collect();
            let target = noise[2 * k];
            let analytic = backward(&p, &forward(&p, &window).unwrap(), target);
            let analytic = analytic.slices();
            for (si, slice) in analytic.iter().enumerate() {
                for (j, &a) in slice.iter().enumerate() {
                    let orig = p.slices()[si][j];
                    let mut central = |h: f64| {
                        p.slices_mut()[si][j] = orig + h;
                        let up = half_squared_error(&p, &window, target);
                        p.slices_mut()[si][j] = orig - h;
                        let down = half_squared_error(&p, &window, target);
                        p.slices_mut()[si][j] = orig;
                        (up - down) / (2.0 * h)
                    };
                    // Richardson extrapolation: fourth-order accurate, and the
                    // step is large enough that roundoff stays near 1e-12.
                    let numeric = (4.0 * central(step / 2.0) - central(step)) / 3.0;
                    worst = worst.max((a - numeric).abs() / (a.abs() + numeric.abs() + 1e-12));
                    checked += 1;
                }
            }
        }
    }
    let (fast, time) = within(start.elapsed(), 10);
    s.record(
        "5",
        worst < 1e-5 && fast,
        format!(
            "BPTT vs Richardson-extrapolated central differences (h=1e-3), 5 seeds x k in {{1,4,10}}, {checked} entries: max relative error {worst:.2e} < 1e-5; {time}"
        ),
    );
}

fn lstm_capacity(s: &mut Suite) {
    let start = Instant::now();
    let series: Vec<f64> = (0..200).map(|t| (0.1 * t as f64).sin()).collect();
    let config = LstmConfig {
        input_dim: 1,
        hidden_size: 16,
        lookback_k: 8,
        epochs: 500,
        learning_rate: 0.05,
        seed: 7,
        grad_clip: 5.0,
        momentum: 0.95,
    };
    let set = make_windows(&[&series], config.lookback_k).unwrap();
    let first = train(&config, &set).unwrap();
    let elapsed = start.elapsed();
    let second = train(&config, &set).unwrap();
    let last = *first.loss_curve.last().unwrap();
    let deterministic = first.params == second.params && first.loss_curve == second.loss_curve;
    let (fast, time) = within(elapsed, 60);
    s.record(
        "6",
        last < 1e-3 && deterministic && fast,
        format!(
            "noiseless sin(0.1t), k=8, hidden=16, 500 epochs, lr=0.05: final normalized MSE {last:.2e} < 1e-3; \
             repeat run identical: {deterministic}; {time}"
        ),
    );
}

fn metric_hand_cases(s: &mut Suite) {
    let a = metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
    let b = metrics(&[2.0, 2.0], &[0.0, 2.0]).unwrap();
    let c = metrics(&[100.0, 200.0], &[110.0, 180.0]).unwrap();
    let ok = (a.mse, a.rmse, a.mae, a.mape_percent) == (0.0, 0.0, 0.0, Some(0.0))
        && (b.mse, b.rmse, b.mae, b.mape_percent) == (2.0, 2f64.sqrt(), 1.0, Some(50.0))
        && c.mape_percent == Some(10.0);
    s.reports.extend([a, b, c]);
    s.record(
        "7a",
        ok,
        format!(
            "hand cases exact: perfect -> (0,0,0,0%); [2,2] vs [0,2] -> mse {}, rmse {:.5}, mae {}, mape {:?}% \
             (the MAPE formula gives 50%); [100,200] vs [110,180] -> mape {:?}%",
            b.mse, b.rmse, b.mae, b.mape_percent, c.mape_percent
        ),
    );
}

fn benchmark_config(seed: u64) -> LstmConfig {
    LstmConfig {
        input_dim: 1,
        hidden_size: 8,
        lookback_k: 10,
        epochs: 600,
        learning_rate: 0.1,
        seed,
        grad_clip: 5.0,
        momentum: 0.9,
    }
}

fn collect(s: &mut Suite, label: &str, report: &ComparisonReport) {
    for m in &report.models {
        s.reports.extend(m.subsets.values().copied());
        s.structures.push((
            format!("{label}/{}", m.name),
            m.trace.steps.iter().map(|st| st.structure.clone()).collect(),
        ));
    }
    s.reports.extend(report.lag_one_subsets.values().copied());
}

fn hybrid_ordering(s: &mut Suite) {
    let start = Instant::now();
    let ao = ArimaOrder::new(1, 0, 1).unwrap();
    let go = GarchOrder::new(1, 1).unwrap();
    let (mut beats_ag, mut beats_lstm, mut feature_helps, mut all) = (0, 0, 0, 0);
    for seed in 0..10u64 {
        let y = benchmark_series(1000, seed).unwrap();
        let (train, test) = train_test_split(&y, 0.94).unwrap();
        let cfg = benchmark_config(seed);
        let roster: Vec<(String, Box<dyn Forecaster>)> = vec![
            ("ag".into(), Box::new(ArmaGarchForecaster::new(ao, Some(go)))),
            ("lstm".into(), Box::new(LstmForecaster::new(cfg.clone()))),
            (
                "ag-lstm".into(),
                Box::new(DecompositionForecaster::new(ao, Some(go), cfg.clone())),
            ),
            ("lstm-garch".into(), Box::new(StatFeatureForecaster::new(ao, go, cfg))),
        ];
        let report = compare(roster, &train, &test, &[7, 14, 21, test.len()]).unwrap();
        collect(s, &format!("benchmark seed {seed}"), &report);
        let mse = |name: &str| report.model(name).unwrap().subsets[&test.len()].mse;
        let (ag, lstm, hybrid, feature) = (mse("ag"), mse("lstm"), mse("ag-lstm"), mse("lstm-garch"));
        let flags = [hybrid < ag, hybrid < lstm, feature < lstm];
        beats_ag += usize::from(flags[0]);
        beats_lstm += usize::from(flags[1]);
        feature_helps += usize::from(flags[2]);
        all += usize::from(flags.iter().all(|&f| f));
        println!("      seed {seed}: MSE ag {ag:.5}  lstm {lstm:.5}  ag-lstm {hybrid:.5}  lstm-garch {feature:.5}");
    }
    let (fast, time) = within(start.elapsed(), 600);
    s.record(
        "8",
        all >= 8 && fast,
        format!(
            "benchmark y = ARMA(1,1)-GARCH(1,1) + 0.5 sin(0.2t), 10 seeds, full test set: all three orderings hold in \
             {all}/10 (need >= 8); AG-LSTM < AG {beats_ag}/10, AG-LSTM < LSTM {beats_lstm}/10, \
             LSTM-GARCH < LSTM {feature_helps}/10; {time}"
        ),
    );
}

fn rolling_fidelity(s: &mut Suite) {
    let mut exact = true;
    for seed in 0..5u64 {
        let y = TimeSeries::new(random_walk(120, 700 + seed)).unwrap();
        let (train, test) = train_test_split(&y, 0.75).unwrap();
        let trace = rolling_one_step(&mut RandomWalk, &train, &test).unwrap();
        let mut expected = vec![train.last()];
        expected.extend_from_slice(&test.values()[..test.len() - 1]);
        exact &= trace.predicted() == expected;
        s.structures.push((
            format!("random walk {seed}"),
            trace.steps.iter().map(|st| st.structure.clone()).collect(),
        ));
    }
    let varying: Vec<&str> = s
        .structures
        .iter()
        .filter(|(_, st)| st.windows(2).any(|w| w[0] != w[1]))
        .map(|(label, _)| label.as_str())
        .collect();
    s.record(
        "9",
        exact && varying.is_empty() && !s.structures.is_empty(),
        format!(
            "random-walk trace equals lag-one copy exactly: {exact}; structure constant in {}/{} traces",
            s.structures.len() - varying.len(),
            s.structures.len()
        ),
    );
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hybridcast"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).trim().to_string())
    }
}

fn cli_determinism(s: &mut Suite) {
    let dir = std::env::temp_dir().join(format!("hybridcast-acceptance-{}", std::process::id()));
    let input = dir.join("benchmark.csv");
    let out = dir.join("out");
    let (input_s, out_s) = (input.to_str().unwrap(), out.to_str().unwrap());
    let args = [
        "evaluate",
        "--input",
        input_s,
        "--out",
        out_s,
        "--order",
        "1,0,1",
        "--garch",
        "1,1",
        "--split",
        "0.9",
        "--subsets",
        "7,14,21",
        "--epochs",
        "60",
        "--hidden",
        "6",
        "--seed",
        "5",
    ];
    let outcome = (|| -> Result<(bool, Vec<u8>), String> {
        run_cli(&["simulate", "--n", "400", "--seed", "11", "--out", input_s])?;
        run_cli(&args)?;
        let first = std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?;
        run_cli(&args)?;
        let second = std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?;
        Ok((first == second, first))
    })();
    let _ = std::fs::remove_dir_all(&dir);
    match outcome {
        Ok((identical, bytes)) => {
            let parsed: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
            let mut entries = 0;
            if let Some(models) = parsed["models"].as_object() {
                for model in models.values() {
                    for m in model["subsets"].as_object().into_iter().flat_map(|o| o.values()) {
                        let (mse, rmse) = (
                            m["mse"].as_f64().unwrap_or(f64::NAN),
                            m["rmse"].as_f64().unwrap_or(f64::NAN),
                        );
                        s.reports.push(MetricsReport {
                            mse,
                            rmse,
                            mae: m["mae"].as_f64().unwrap_or(f64::NAN),
                            mape_percent: m["mape_percent"].as_f64(),
                            n: 0,
                        });
                        entries += 1;
                    }
                }
            }
            s.record(
                "10",
                identical && entries > 0,
                format!(
                    "`evaluate` twice with one config: report.json byte-identical: {identical} ({} bytes)",
                    bytes.len()
                ),
            );
        }
        Err(e) => s.record("10", false, format!("evaluate run failed: {e}")),
    }
}

fn rmse_consistency(s: &mut Suite) {
    let bad = s
        .reports
        .iter()
        .filter(|m| {
            let consistent = (m.rmse * m.rmse - m.mse).abs() <= 1e-12 * m.mse.max(1.0);
            !consistent
        })
        .count();
    let total = s.reports.len();
    s.record(
        "7b",
        bad == 0 && total > 0,
        format!("rmse^2 = mse (rel 1e-12) on all {total} emitted metric reports, {bad} mismatches"),
    );
}

fn real_data_context() {
    let Ok(path) = std::env::var("HYBRIDCAST_AMZN_CSV") else {
        println!(
            "INFO criterion 11: skipped; set HYBRIDCAST_AMZN_CSV to a CSV with Date and Open columns of 2019 AMZN prices to run it"
        );
        return;
    };
    let output = Command::new(env!("CARGO_BIN_EXE_hybridcast"))
        .args([
            "stationarity",
            "--input",
            &path,
            "--date-col",
            "Date",
            "--value-col",
            "Open",
        ])
        .output();
    match output {
        Ok(o) => {
            for line in String::from_utf8_lossy(&o.stdout).lines() {
                println!("INFO criterion 11: {line}");
            }
            if !o.status.success() {
                println!("INFO criterion 11: {}", String::from_utf8_lossy(&o.stderr).trim());
            }
        }
        Err(e) => println!("INFO criterion 11: {e}"),
    }
}

fn main() -> ExitCode {
    let mut suite = Suite {
        failed: Vec::new(),
        reports: Vec::new(),
        structures: Vec::new(),
    };
    // HYBRIDCAST_ACCEPTANCE_ONLY=1,5 runs a subset while iterating; the
    // default runs everything.
    let only: Option<Vec<String>> = std::env::var("HYBRIDCAST_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').map(|c| c.trim().to_string()).collect());
    let criteria: [Criterion; 11] = [
        ("1", differencing_round_trip),
        ("2", simulation_recovery),
        ("3", test_calibration),
        ("4", reference_agreement),
        ("5", gradient_check),
        ("6", lstm_capacity),
        ("7", metric_hand_cases),
        ("8", hybrid_ordering),
        ("9", rolling_fidelity),
        ("10", cli_determinism),
        ("7", rmse_consistency),
    ];
    for (id, criterion) in criteria {
        if only.as_ref().is_none_or(|o| o.iter().any(|c| c == id)) {
            criterion(&mut suite);
        }
    }
    real_data_context();
    if suite.failed.is_empty() {
        if only.is_some() {
            println!("acceptance: selected criteria passed; run without HYBRIDCAST_ACCEPTANCE_ONLY for the full suite");
        } else {
            println!("acceptance: all gating criteria passed");
        }
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {}", suite.failed.join(", "));
        ExitCode::FAILURE
    }
}
