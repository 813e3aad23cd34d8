use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use hybridcast::arima::{auto_order, fit_arima_with, ArimaFitOptions, ArimaOrder};
use hybridcast::eval::{
    compare, ArmaGarchForecaster, ComparisonReport, DecompositionForecaster, Forecaster, LstmForecaster, MetricsReport,
    StatFeatureForecaster,
};
use hybridcast::garch::{fit_arma_garch_with, garch_order_select, ArmaGarchModel, GarchOrder};
use hybridcast::series::{difference_values, train_test_split};
use hybridcast::simulate::benchmark_series;
use hybridcast::stats::{adf_test, arch_lm_test, kpss_test, ljung_box_test, LagOrder, TestResult};
use hybridcast::TimeSeries;
use serde::Serialize;

use crate::config::{GarchChoice, RunConfig};
use crate::data::{load_csv, write_csv};

const LJUNG_BOX_LAG: usize = 10;
const ARCH_LM_LAG: usize = 5;

fn load(config: &RunConfig) -> Result<TimeSeries> {
    let input = config
        .input
        .as_deref()
        .context("no input file; pass --input or set input= in the config")?;
    load_csv(input, &config.date_col, &config.value_col)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Orders {
    pub arima: ArimaOrder,
    pub garch: Option<GarchOrder>,
    pub arima_selected: bool,
    pub garch_selected: bool,
}

/// Uses explicit orders where configured and selects the rest on `series`.
pub fn resolve_orders(config: &RunConfig, series: &TimeSeries) -> Result<Orders> {
    let arima = match config.order {
        Some(o) => o,
        None => auto_order(series, config.p_max, config.q_max, config.d_max).context("ARIMA order selection")?,
    };
    let garch = match config.garch {
        GarchChoice::None => None,
        GarchChoice::Fixed(g) => Some(g),
        GarchChoice::Auto => {
            let options = ArimaFitOptions {
                max_iterations: config.max_iter,
            };
            let mean = fit_arima_with(series, arima, &options).context("ARIMA fit for GARCH order selection")?;
            Some(
                garch_order_select(mean.residuals.values(), config.garch_p_max, config.garch_q_max)
                    .context("GARCH order selection")?,
            )
        }
    };
    Ok(Orders {
        arima,
        garch,
        arima_selected: config.order.is_none(),
        garch_selected: config.garch == GarchChoice::Auto,
    })
}

fn describe(name: &str, r: &TestResult) -> String {
    format!(
        "{name:<28} statistic {:>10.4}  p-value {:.4}  lags {:>2}  reject at 5%: {}",
        r.statistic,
        r.p_value,
        r.lags_used,
        if r.reject_at_5pct { "yes" } else { "no" }
    )
}

/// ADF and KPSS on the series and its first difference.
pub fn stationarity(config: &RunConfig) -> Result<String> {
    let series = load(config)?;
    let diff = difference_values(series.values(), 1);
    let mut out = String::new();
    for (label, x) in [("level", series.values()), ("first difference", &diff[..])] {
        let adf = adf_test(x, LagOrder::Auto).with_context(|| format!("ADF on {label}"))?;
        let kpss = kpss_test(x).with_context(|| format!("KPSS on {label}"))?;
        writeln!(out, "{}", describe(&format!("ADF ({label})"), &adf))?;
        writeln!(out, "{}", describe(&format!("KPSS ({label})"), &kpss))?;
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    ljung_box: TestResult,
    arch_lm: TestResult,
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    config: &'a RunConfig,
    orders: Orders,
    model: &'a ArmaGarchModel,
    diagnostics: Diagnostics,
}

/// Residuals divided by the conditional standard deviation.
fn standardized_residuals(model: &ArmaGarchModel) -> Vec<f64> {
    model
        .arima
        .residuals
        .values()
        .iter()
        .zip(model.h_series())
        .map(|(e, h)| e / h.sqrt())
        .collect()
}

/// Fits ARIMA-GARCH on the whole series and writes `model.json`.
pub fn fit(config: &RunConfig) -> Result<String> {
    let series = load(config)?;
    let orders = resolve_orders(config, &series)?;
    let model = fit_arma_garch_with(&series, orders.arima, orders.garch, config.max_iter).context("model fit")?;
    let z = standardized_residuals(&model);
    let diagnostics = Diagnostics {
        ljung_box: ljung_box_test(&z, LJUNG_BOX_LAG, orders.arima.p + orders.arima.q)
            .context("Ljung-Box on standardized residuals")?,
        arch_lm: arch_lm_test(&z, ARCH_LM_LAG).context("ARCH-LM on standardized residuals")?,
    };

    let mut out = String::new();
    let structure = match orders.garch {
        Some(g) => format!("ARIMA{}-GARCH{g}", orders.arima),
        None => format!("ARIMA{}", orders.arima),
    };
    writeln!(out, "model {structure}  AIC {:.4}", model.aic_total)?;
    if !model.arima.stationary {
        writeln!(out, "warning: AR polynomial is not stationary")?;
    }
    if !model.arima.invertible {
        writeln!(out, "warning: MA polynomial is not invertible")?;
    }
    writeln!(out, "{}", describe("Ljung-Box (standardized)", &diagnostics.ljung_box))?;
    writeln!(out, "{}", describe("ARCH-LM (standardized)", &diagnostics.arch_lm))?;

    let report = FitReport {
        config,
        orders,
        model: &model,
        diagnostics,
    };
    let path = config.out.join("model.json");
    write_output(&path, &to_json(&report)?)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsetMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub mape_percent: Option<f64>,
}

impl From<&MetricsReport> for SubsetMetrics {
    fn from(m: &MetricsReport) -> Self {
        Self {
            mse: m.mse,
            rmse: m.rmse,
            mae: m.mae,
            mape_percent: m.mape_percent,
        }
    }
}

#[derive(Debug, Serialize)]
struct ModelEntry {
    structure: String,
    subsets: BTreeMap<usize, SubsetMetrics>,
}

#[derive(Debug, Serialize)]
struct EvaluateDiagnostics {
    orders: Orders,
    train_length: usize,
    test_length: usize,
    lag_one: BTreeMap<usize, SubsetMetrics>,
    failed_refits: BTreeMap<String, usize>,
}

#[derive(Debug, Serialize)]
struct EvaluateReport<'a> {
    config: &'a RunConfig,
    models: BTreeMap<String, ModelEntry>,
    diagnostics: EvaluateDiagnostics,
}

fn build_roster(config: &RunConfig, orders: &Orders) -> Result<Vec<(String, Box<dyn Forecaster>)>> {
    let lstm = config.lstm_config();
    config
        .models
        .iter()
        .map(|name| {
            let model: Box<dyn Forecaster> = match name.as_str() {
                "ag" => Box::new(ArmaGarchForecaster::new(orders.arima, orders.garch)),
                "lstm" => Box::new(LstmForecaster::new(lstm.clone())),
                "ag-lstm" => Box::new(DecompositionForecaster::new(orders.arima, orders.garch, lstm.clone())),
                "lstm-garch" => Box::new(StatFeatureForecaster::new(
                    orders.arima,
                    orders.garch.context("lstm-garch needs a GARCH stage")?,
                    lstm.clone(),
                )),
                other => anyhow::bail!("unknown model {other:?}"),
            };
            Ok((name.clone(), model))
        })
        .collect()
}

fn subset_map(m: &BTreeMap<usize, MetricsReport>) -> BTreeMap<usize, SubsetMetrics> {
    m.iter().map(|(k, v)| (*k, v.into())).collect()
}

/// Rolling one-step comparison; writes `report.json`, `trace.csv` and
/// `metrics.txt` and returns the metrics table.
pub fn evaluate(config: &RunConfig) -> Result<String> {
    let series = load(config)?;
    let (train, test) = train_test_split(&series, config.train_fraction)?;
    if let Some(&longest) = config.subsets.last() {
        anyhow::ensure!(
            longest <= test.len(),
            "subset length {longest} exceeds the {} test points",
            test.len()
        );
    }
    let orders = resolve_orders(config, &train)?;
    let roster = build_roster(config, &orders)?;
    let comparison = compare(roster, &train, &test, &config.subsets)?;

    let report = EvaluateReport {
        config,
        models: comparison
            .models
            .iter()
            .map(|m| {
                (
                    m.name.clone(),
                    ModelEntry {
                        structure: m.structure.clone(),
                        subsets: subset_map(&m.subsets),
                    },
                )
            })
            .collect(),
        diagnostics: EvaluateDiagnostics {
            orders,
            train_length: train.len(),
            test_length: test.len(),
            lag_one: subset_map(&comparison.lag_one_subsets),
            failed_refits: comparison
                .models
                .iter()
                .map(|m| (m.name.clone(), m.trace.failed_refits()))
                .collect(),
        },
    };
    let table = metrics_table(&comparison);
    write_output(&config.out.join("report.json"), &to_json(&report)?)?;
    write_output(&config.out.join("trace.csv"), &trace_csv(&comparison)?)?;
    write_output(&config.out.join("metrics.txt"), &table)?;
    Ok(table)
}

/// One row per test step: index, date, actual, each model, lag-one.
pub fn trace_csv(report: &ComparisonReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string(), "date".into(), "actual".into()];
    header.extend(report.models.iter().map(|m| m.name.clone()));
    header.push("lag_one".into());
    writer.write_record(&header)?;
    for (i, actual) in report.actual.iter().enumerate() {
        let date = report.dates.as_ref().map_or(String::new(), |d| d[i].clone());
        let mut row = vec![i.to_string(), date, actual.to_string()];
        row.extend(report.models.iter().map(|m| m.trace.steps[i].predicted.to_string()));
        row.push(report.lag_one[i].to_string());
        writer.write_record(&row)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

fn table_row(out: &mut String, name: &str, m: &MetricsReport) {
    let mape = m.mape_percent.map_or("n/a".to_string(), |v| format!("{v:.2}"));
    let _ = writeln!(
        out,
        "{name:<12} {:>14.6} {:>14.6} {:>14.6} {mape:>10}",
        m.mse, m.rmse, m.mae
    );
}

/// Human-readable metrics, one block per test subset.
pub fn metrics_table(report: &ComparisonReport) -> String {
    let mut out = String::new();
    for len in &report.subset_lengths {
        let _ = writeln!(out, "first {len} test points");
        let _ = writeln!(
            out,
            "{:<12} {:>14} {:>14} {:>14} {:>10}",
            "model", "MSE", "RMSE", "MAE", "MAPE(%)"
        );
        for m in &report.models {
            table_row(&mut out, &m.name, &m.subsets[len]);
        }
        table_row(&mut out, "lag-one", &report.lag_one_subsets[len]);
        out.push('\n');
    }
    out
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes the hybrid benchmark series as a `date,value` CSV.
pub fn simulate(n: usize, seed: u64, out: &Path) -> Result<String> {
    let series = benchmark_series(n, seed)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    write_csv(out, &series)?;
    Ok(format!("wrote {n} points to {}\n", out.display()))
}
