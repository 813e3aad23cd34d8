use crate::error::{invalid, Error, Result};
use crate::linalg::ols;
use crate::special::chi_square_sf;

use super::{acf, is_constant, NullHypothesis, TestResult};

/// Ljung-Box portmanteau test. Degrees of freedom are `lag - fitted_params`.
pub fn ljung_box_test(x: &[f64], lag: usize, fitted_params: usize) -> Result<TestResult> {
    let n = x.len();
    if lag <= fitted_params {
        return Err(invalid(format!(
            "lag {lag} must exceed the {fitted_params} fitted parameters"
        )));
    }
    if lag >= n {
        return Err(invalid(format!("lag {lag} needs more than {n} observations")));
    }
    let rho = acf(x, lag)?;
    let nf = n as f64;
    let q = nf * (nf + 2.0) * (1..=lag).map(|k| rho[k] * rho[k] / (nf - k as f64)).sum::<f64>();
    let p_value = chi_square_sf(q, (lag - fitted_params) as f64)?;
    Ok(TestResult::new(q, p_value, lag, NullHypothesis::WhiteNoise))
}

/// Engle's Lagrange-multiplier test for ARCH effects.
///
/// Regresses `e_t²` on a constant and `e²_{t-1..t-lag}`; the statistic is
/// `(n - lag) · R²` with `lag` degrees of freedom.
pub fn arch_lm_test(residuals: &[f64], lag: usize) -> Result<TestResult> {
    let n = residuals.len();
    if lag == 0 || lag + 2 >= n {
        return Err(invalid(format!(
            "ARCH-LM lag {lag} must be in 1..{}",
            n.saturating_sub(2)
        )));
    }
    let sq: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    if is_constant(&sq) {
        return Err(Error::ZeroVariance("squared residuals are constant".into()));
    }
    let rows: Vec<Vec<f64>> = (lag..n)
        .map(|t| {
            let mut row = Vec::with_capacity(lag + 1);
            row.push(1.0);
            row.extend((1..=lag).map(|i| sq[t - i]));
            row
        })
        .collect();
    let fit = ols(&sq[lag..], &rows)?;
    let statistic = rows.len() as f64 * fit.r_squared;
    let p_value = chi_square_sf(statistic.max(0.0), lag as f64)?;
    Ok(TestResult::new(statistic, p_value, lag, NullHypothesis::NoArchEffect))
}
