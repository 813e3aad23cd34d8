//! Two ways of pairing ARIMA-GARCH with an LSTM.
//!
//! The decomposition model splits `y_t` into a part ARIMA-GARCH explains and
//! its residual `r_t`; an LSTM forecasts `r_{t+1}` from the last `k`
//! residuals and the two forecasts are added. Skipping the GARCH stage gives
//! ARIMA-LSTM; order `(0,d,0)` with GARCH gives GARCH-LSTM.
//!
//! The statistic-feature model keeps the LSTM on `y_t` itself and feeds the
//! past conditional variances `h_{t-k}..h_{t-1}` as a second input channel.

use serde::{Deserialize, Serialize};

use crate::arima::ArimaOrder;
use crate::error::{invalid, Result};
use crate::garch::{fit_arma_garch_with, ArmaGarchModel, GarchOrder};
use crate::lstm::{make_windows, train, train_with, LstmConfig, Normalizer, TrainedLstm};
use crate::series::TimeSeries;

const FIT_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionModel {
    pub ag: ArmaGarchModel,
    pub residual_lstm: TrainedLstm,
    pub lookback_k: usize,
}

/// Fits ARIMA-GARCH on `train`, then an LSTM on windows of its residuals.
/// `garch_order: None` gives the ARIMA-LSTM form.
pub fn fit_decomposition(
    train_series: &TimeSeries,
    arima_order: ArimaOrder,
    garch_order: Option<GarchOrder>,
    lstm: &LstmConfig,
) -> Result<DecompositionModel> {
    let ag = fit_arma_garch_with(train_series, arima_order, garch_order, FIT_ITERATIONS)?;
    let config = LstmConfig {
        input_dim: 1,
        ..lstm.clone()
    };
    let k = config.lookback_k;
    let r = ag.arima.residuals.values();
    if r.len() <= k {
        return Err(invalid(format!(
            "{} residuals cannot fill a window of {k} plus a target",
            r.len()
        )));
    }
    let set = make_windows(&[r], k)?;
    let residual_lstm = train(&config, &set)?;
    Ok(DecompositionModel {
        ag,
        residual_lstm,
        lookback_k: k,
    })
}

impl DecompositionModel {
    /// The two addends of the next-step forecast: ARIMA-GARCH conditional
    /// mean and the LSTM residual forecast. Residuals are recomputed over
    /// `history` under the current coefficients.
    pub fn components(&self, history: &TimeSeries) -> Result<(f64, f64)> {
        let k = self.lookback_k;
        let r = self.ag.arima.residuals(history)?;
        if r.len() < k {
            return Err(invalid(format!(
                "history yields {} residuals, the LSTM needs {k}",
                r.len()
            )));
        }
        let window: Vec<Vec<f64>> = r.values()[r.len() - k..].iter().map(|&v| vec![v]).collect();
        let statistical = self.ag.forecast_one(history)?;
        let residual = self.residual_lstm.predict_one(&window)?;
        Ok((statistical, residual))
    }

    pub fn predict_one(&self, history: &TimeSeries) -> Result<f64> {
        self.components(history).map(|(s, r)| s + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatFeatureModel {
    /// Only used to produce the `h_t` channel.
    pub ag: ArmaGarchModel,
    pub lstm: TrainedLstm,
    pub lookback_k: usize,
}

/// Fits ARIMA-GARCH on `train` and an LSTM on aligned `(y_t, h_t)` windows
/// targeting `y`.
pub fn fit_stat_feature(
    train_series: &TimeSeries,
    arima_order: ArimaOrder,
    garch_order: GarchOrder,
    lstm: &LstmConfig,
) -> Result<StatFeatureModel> {
    fit_stat_feature_with(train_series, arima_order, garch_order, lstm, false)
}

/// [`fit_stat_feature`], optionally with the `h` input weights pinned at
/// zero for the whole of training.
///
/// A constant `h` channel is scaled by 1 rather than rejected.
pub fn fit_stat_feature_with(
    train_series: &TimeSeries,
    arima_order: ArimaOrder,
    garch_order: GarchOrder,
    lstm: &LstmConfig,
    freeze_h: bool,
) -> Result<StatFeatureModel> {
    let ag = fit_arma_garch_with(train_series, arima_order, Some(garch_order), FIT_ITERATIONS)?;
    let config = LstmConfig {
        input_dim: 2,
        ..lstm.clone()
    };
    let k = config.lookback_k;
    let y = &train_series.values()[arima_order.d..];
    let h = ag.h_series();
    if y.len() <= k {
        return Err(invalid(format!(
            "{} aligned observations cannot fill a window of {k} plus a target",
            y.len()
        )));
    }
    let set = make_windows(&[y, &h], k)?;
    let normalizer = Normalizer::fit_with_feature_fallback(&[&set.feature_values(0), &set.feature_values(1)])?;
    let frozen: &[usize] = if freeze_h { &[1] } else { &[] };
    let lstm = train_with(&config, &set, normalizer, frozen)?;
    Ok(StatFeatureModel {
        ag,
        lstm,
        lookback_k: k,
    })
}

impl StatFeatureModel {
    /// The last `k` `(y, h)` input vectors for forecasting after `history`,
    /// with `h` recomputed under the current coefficients.
    pub fn input_window(&self, history: &TimeSeries) -> Result<Vec<Vec<f64>>> {
        let k = self.lookback_k;
        let d = self.ag.arima.order.d;
        let r = self.ag.arima.residuals(history)?;
        if r.len() < k {
            return Err(invalid(format!(
                "history yields {} aligned points, the LSTM needs {k}",
                r.len()
            )));
        }
        let h = self.ag.variance_path(r.values());
        let y = &history.values()[d..];
        let start = y.len() - k;
        Ok((start..y.len()).map(|t| vec![y[t], h[t]]).collect())
    }

    pub fn predict_one(&self, history: &TimeSeries) -> Result<f64> {
        self.lstm.predict_one(&self.input_window(history)?)
    }
}
