use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Point-forecast accuracy. `mape_percent` is `None` when an actual value is
/// zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub mape_percent: Option<f64>,
    pub n: usize,
}

pub fn metrics(actual: &[f64], predicted: &[f64]) -> Result<MetricsReport> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(invalid(format!(
            "metrics need equal non-zero lengths, got {} actual and {} predicted",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(invalid("metrics on non-finite values"));
    }
    let n = actual.len() as f64;
    let mse = actual.iter().zip(predicted).map(|(a, p)| (p - a).powi(2)).sum::<f64>() / n;
    let mae = actual.iter().zip(predicted).map(|(a, p)| (p - a).abs()).sum::<f64>() / n;
    let mape_percent = if actual.contains(&0.0) {
        None
    } else {
        Some(
            100.0 / n
                * actual
                    .iter()
                    .zip(predicted)
                    .map(|(a, p)| ((a - p) / a).abs())
                    .sum::<f64>(),
        )
    };
    Ok(MetricsReport {
        mse,
        rmse: mse.sqrt(),
        mae,
        mape_percent,
        n: actual.len(),
    })
}

/// Relative reduction of each metric, in percent; `None` where the baseline
/// is zero or undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub mse: Option<f64>,
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
    pub mape: Option<f64>,
}

pub fn improvement_percent(baseline: &MetricsReport, candidate: &MetricsReport) -> Improvement {
    let pct = |b: f64, c: f64| (b > 0.0).then(|| 100.0 * (b - c) / b);
    Improvement {
        mse: pct(baseline.mse, candidate.mse),
        rmse: pct(baseline.rmse, candidate.rmse),
        mae: pct(baseline.mae, candidate.mae),
        mape: match (baseline.mape_percent, candidate.mape_percent) {
            (Some(b), Some(c)) => pct(b, c),
            _ => None,
        },
    }
}
