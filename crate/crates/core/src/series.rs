//! Series container, differencing and splitting.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// An ordered, non-empty sequence of finite observations.
///
/// Dates are opaque labels compared lexicographically; alignment is always
/// by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    dates: Option<Vec<String>>,
    label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_label(values, None, "")
    }

    pub fn with_dates(values: Vec<f64>, dates: Vec<String>) -> Result<Self> {
        Self::with_label(values, Some(dates), "")
    }

    pub fn with_label(values: Vec<f64>, dates: Option<Vec<String>>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("a time series needs at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("value at index {i} is not finite")));
        }
        if let Some(d) = &dates {
            if d.len() != values.len() {
                return Err(invalid(format!("{} dates for {} values", d.len(), values.len())));
            }
            if let Some(i) = d.windows(2).position(|w| w[0] >= w[1]) {
                return Err(invalid(format!("dates not strictly increasing at index {}", i + 1)));
            }
        }
        Ok(Self {
            values,
            dates,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> Option<&[String]> {
        self.dates.as_deref()
    }

    pub fn date(&self, i: usize) -> Option<&str> {
        self.dates.as_ref().map(|d| d[i].as_str())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// The first `n` observations (dates included).
    pub fn head(&self, n: usize) -> Result<TimeSeries> {
        if n == 0 || n > self.len() {
            return Err(invalid(format!("prefix length {n} outside 1..={}", self.len())));
        }
        Ok(self.slice(0, n))
    }

    fn slice(&self, start: usize, end: usize) -> TimeSeries {
        TimeSeries {
            values: self.values[start..end].to_vec(),
            dates: self.dates.as_ref().map(|d| d[start..end].to_vec()),
            label: self.label.clone(),
        }
    }

    /// Appends one observation, as happens when a test value is revealed.
    pub fn push(&mut self, value: f64, date: Option<String>) -> Result<()> {
        if !value.is_finite() {
            return Err(invalid("cannot append a non-finite value"));
        }
        match (&mut self.dates, date) {
            (Some(dates), Some(date)) => {
                if dates.last().is_some_and(|last| *last >= date) {
                    return Err(invalid(format!("date {date} does not advance the series")));
                }
                dates.push(date);
            }
            (Some(_), None) => return Err(invalid("series carries dates; a date is required")),
            (None, _) => {}
        }
        self.values.push(value);
        Ok(())
    }

    /// Concatenation `self ∪ other`. Dates are kept only if both sides have them.
    pub fn concat(&self, other: &TimeSeries) -> Result<TimeSeries> {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let dates = match (&self.dates, &other.dates) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        TimeSeries::with_label(values, dates, self.label.clone())
    }
}

/// The `d`-th difference of a series plus what is needed to undo it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferencedSeries {
    pub values: Vec<f64>,
    pub order_d: usize,
    /// The first `order_d` original observations.
    pub anchors: Vec<f64>,
}

/// Applies first differencing `d` times.
pub fn difference(series: &TimeSeries, d: usize) -> Result<DifferencedSeries> {
    if d >= series.len() {
        return Err(invalid(format!("cannot difference {} values {d} times", series.len())));
    }
    Ok(DifferencedSeries {
        values: difference_values(series.values(), d),
        order_d: d,
        anchors: series.values()[..d].to_vec(),
    })
}

/// `d`-fold first differences of a slice. Returns an empty vector if `d >= len`.
pub fn difference_values(values: &[f64], d: usize) -> Vec<f64> {
    let mut out = values.to_vec();
    for _ in 0..d {
        if out.len() < 2 {
            return Vec::new();
        }
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Inverts [`difference`].
pub fn integrate(diff: &DifferencedSeries) -> Result<TimeSeries> {
    if diff.anchors.len() != diff.order_d {
        return Err(invalid(format!(
            "{} anchors for differencing order {}",
            diff.anchors.len(),
            diff.order_d
        )));
    }
    if diff.values.is_empty() {
        return Err(invalid("nothing to integrate"));
    }
    // Starting value of each intermediate difference level, level 0 first.
    let starts: Vec<f64> = (0..diff.order_d)
        .map(|level| difference_values(&diff.anchors, level)[0])
        .collect();
    let mut current = diff.values.clone();
    for &start in starts.iter().rev() {
        let mut next = Vec::with_capacity(current.len() + 1);
        let mut acc = start;
        next.push(acc);
        for v in &current {
            acc += v;
            next.push(acc);
        }
        current = next;
    }
    TimeSeries::new(current)
}

/// Splits into a training head of `floor(n * train_fraction)` points and the rest.
pub fn train_test_split(series: &TimeSeries, train_fraction: f64) -> Result<(TimeSeries, TimeSeries)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(invalid(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let n = series.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(invalid(format!(
            "split of {n} points at {train_fraction} leaves an empty side"
        )));
    }
    Ok((series.slice(0, n_train), series.slice(n_train, n)))
}

/// Nested prefixes of a test set, e.g. one, two and three weeks.
pub fn prefix_subsets(test: &TimeSeries, lengths: &[usize]) -> Result<Vec<TimeSeries>> {
    if lengths.is_empty() {
        return Err(invalid("no subset lengths given"));
    }
    if lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!(
            "subset lengths {lengths:?} are not strictly increasing"
        )));
    }
    lengths.iter().map(|&len| test.head(len)).collect()
}
