//! Stationarity and residual diagnostics.
//!
//! Every test returns a [`TestResult`]; p-values for the unit-root tests come
//! from interpolating embedded critical-value tables and are clamped at the
//! table edges, p-values for the portmanteau tests from the chi-square law.

mod acf;
mod portmanteau;
mod tables;
mod unit_root;

use serde::{Deserialize, Serialize};

pub use acf::{acf, pacf};
pub use portmanteau::{arch_lm_test, ljung_box_test};
pub use unit_root::{adf_test, kpss_lags, kpss_test, LagOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullHypothesis {
    NonStationary,
    Stationary,
    WhiteNoise,
    NoArchEffect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    pub null_hypothesis: NullHypothesis,
    pub reject_at_5pct: bool,
}

impl TestResult {
    pub(crate) fn new(statistic: f64, p_value: f64, lags_used: usize, null: NullHypothesis) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            lags_used,
            null_hypothesis: null,
            reject_at_5pct: p_value < 0.05,
        }
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// True when every element equals the first; exact, unlike a variance test.
pub(crate) fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Population variance (denominator `n`).
pub(crate) fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}
