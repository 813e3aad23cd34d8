use crate::error::{invalid, Error, Result};
use crate::linalg::ols;

use super::tables::{df_quantiles, interpolate, DF_PROBABILITIES, KPSS_LEVEL, KPSS_PROBABILITIES};
use super::{is_constant, mean, NullHypothesis, TestResult};

/// Number of lagged differences in the ADF regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagOrder {
    /// `floor((n - 1)^(1/3))`.
    Auto,
    Fixed(usize),
}

impl LagOrder {
    fn resolve(self, n: usize) -> usize {
        match self {
            LagOrder::Auto => ((n.saturating_sub(1)) as f64).cbrt().floor() as usize,
            LagOrder::Fixed(k) => k,
        }
    }
}

/// Augmented Dickey-Fuller test with a constant and no trend.
///
/// Regresses `Δy_t` on `y_{t-1}`, `Δy_{t-1..t-k}` and a constant; the
/// statistic is the t-ratio of the `y_{t-1}` coefficient.
pub fn adf_test(x: &[f64], lags: LagOrder) -> Result<TestResult> {
    let n = x.len();
    let k = lags.resolve(n);
    if n < k + 10 {
        return Err(invalid(format!(
            "ADF with {k} lags needs at least {} observations, got {n}",
            k + 10
        )));
    }
    if is_constant(x) {
        return Err(Error::ZeroVariance("ADF on a constant series".into()));
    }
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<Vec<f64>> = (k..dx.len())
        .map(|j| {
            let mut row = Vec::with_capacity(k + 2);
            row.push(x[j]);
            row.extend((1..=k).map(|i| dx[j - i]));
            row.push(1.0);
            row
        })
        .collect();
    let fit = ols(&dx[k..], &rows)?;
    let statistic = fit.t_ratio(0);
    let nobs = rows.len();
    let p_value = interpolate(&df_quantiles(nobs), &DF_PROBABILITIES, statistic);
    Ok(TestResult::new(statistic, p_value, k, NullHypothesis::NonStationary))
}

/// Newey-West truncation lag used by [`kpss_test`]: `floor(4 (n/100)^(1/4))`.
pub fn kpss_lags(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// KPSS level-stationarity test with a Bartlett-kernel long-run variance.
pub fn kpss_test(x: &[f64]) -> Result<TestResult> {
    let n = x.len();
    if n < 20 {
        return Err(invalid(format!("KPSS needs at least 20 observations, got {n}")));
    }
    let m = mean(x);
    let e: Vec<f64> = x.iter().map(|v| v - m).collect();
    let lags = kpss_lags(n);

    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    eta /= (n * n) as f64;

    let mut s2: f64 = e.iter().map(|v| v * v).sum();
    for l in 1..=lags {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        let gamma: f64 = e[l..].iter().zip(&e).map(|(a, b)| a * b).sum();
        s2 += 2.0 * w * gamma;
    }
    s2 /= n as f64;
    if !(s2 > 0.0) {
        return Err(Error::ZeroVariance("KPSS long-run variance is zero".into()));
    }
    let statistic = eta / s2;
    let p_value = interpolate(&KPSS_LEVEL, &KPSS_PROBABILITIES, statistic);
    Ok(TestResult::new(statistic, p_value, lags, NullHypothesis::Stationary))
}
