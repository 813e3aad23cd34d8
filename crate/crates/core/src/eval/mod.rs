//! Accuracy metrics and the rolling one-step evaluation protocol.
//!
//! For every test point the forecaster refits its coefficients on all data
//! seen so far (orders and network weights stay fixed), predicts the next
//! value, and only then sees the true value.

mod forecasters;
mod metrics;

pub use forecasters::{
    ArmaGarchForecaster, DecompositionForecaster, Forecaster, FrozenCoefficients, LstmForecaster, RandomWalk,
    StatFeatureForecaster, REFIT_ITERATIONS,
};
pub use metrics::{improvement_percent, metrics, Improvement, MetricsReport};

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    /// Position in the test set.
    pub index: usize,
    pub date: Option<String>,
    pub actual: f64,
    pub predicted: f64,
    /// Model structure in force for this prediction.
    pub structure: String,
    /// Set when the refit before this step failed and the previous
    /// coefficients were kept.
    pub refit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn predicted(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.predicted).collect()
    }

    pub fn actual(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.actual).collect()
    }

    pub fn failed_refits(&self) -> usize {
        self.steps.iter().filter(|s| s.refit_error.is_some()).count()
    }
}

/// Fits on `train`, then walks through `test` one point at a time.
///
/// A failed refit does not abort the run: the step is flagged and the
/// forecaster keeps its previous coefficients. A failed prediction does.
pub fn rolling_one_step(forecaster: &mut dyn Forecaster, train: &TimeSeries, test: &TimeSeries) -> Result<Trace> {
    forecaster.fit(train)?;
    let mut history = train.clone();
    let mut steps = Vec::with_capacity(test.len());
    for (index, &actual) in test.values().iter().enumerate() {
        let refit_error = forecaster.refit(&history).err().map(|e| e.to_string());
        let predicted = forecaster.predict_next(&history)?;
        let date = test.date(index).map(str::to_owned);
        steps.push(TraceStep {
            index,
            date: date.clone(),
            actual,
            predicted,
            structure: forecaster.structure(),
            refit_error,
        });
        history.push(actual, date)?;
    }
    Ok(Trace { steps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelResult {
    pub name: String,
    pub structure: String,
    pub trace: Trace,
    /// Metrics on each test prefix, keyed by prefix length.
    pub subsets: BTreeMap<usize, MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub subset_lengths: Vec<usize>,
    pub actual: Vec<f64>,
    pub dates: Option<Vec<String>>,
    /// The previous actual value, the first-order-lag reference.
    pub lag_one: Vec<f64>,
    pub lag_one_subsets: BTreeMap<usize, MetricsReport>,
    /// In the order the models were given.
    pub models: Vec<ModelResult>,
}

impl ComparisonReport {
    pub fn model(&self, name: &str) -> Option<&ModelResult> {
        self.models.iter().find(|m| m.name == name)
    }
}

fn subset_metrics(actual: &[f64], predicted: &[f64], lengths: &[usize]) -> Result<BTreeMap<usize, MetricsReport>> {
    lengths
        .iter()
        .map(|&len| Ok((len, metrics(&actual[..len], &predicted[..len])?)))
        .collect()
}

/// Runs every model over the full test set (in parallel) and scores each
/// prefix in `subset_lengths` from the same trace.
pub fn compare(
    models: Vec<(String, Box<dyn Forecaster>)>,
    train: &TimeSeries,
    test: &TimeSeries,
    subset_lengths: &[usize],
) -> Result<ComparisonReport> {
    if models.is_empty() {
        return Err(invalid("no models to compare"));
    }
    let names: BTreeSet<&str> = models.iter().map(|(n, _)| n.as_str()).collect();
    if names.len() != models.len() {
        return Err(invalid("model names must be unique"));
    }
    if subset_lengths.is_empty()
        || subset_lengths[0] == 0
        || subset_lengths.windows(2).any(|w| w[0] >= w[1])
        || *subset_lengths.last().unwrap() > test.len()
    {
        return Err(invalid(format!(
            "subset lengths {subset_lengths:?} must be strictly increasing within 1..={}",
            test.len()
        )));
    }

    let results: Vec<Result<(String, String, Trace)>> = models
        .into_par_iter()
        .map(|(name, mut forecaster)| {
            let trace = rolling_one_step(forecaster.as_mut(), train, test)?;
            Ok((name, forecaster.structure(), trace))
        })
        .collect();

    let actual = test.values().to_vec();
    let mut lag_one = vec![train.last()];
    lag_one.extend_from_slice(&actual[..actual.len() - 1]);
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        let (name, structure, trace) = r?;
        let subsets = subset_metrics(&actual, &trace.predicted(), subset_lengths)?;
        out.push(ModelResult {
            name,
            structure,
            trace,
            subsets,
        });
    }
    Ok(ComparisonReport {
        subset_lengths: subset_lengths.to_vec(),
        lag_one_subsets: subset_metrics(&actual, &lag_one, subset_lengths)?,
        actual,
        dates: test.dates().map(<[String]>::to_vec),
        lag_one,
        models: out,
    })
}
