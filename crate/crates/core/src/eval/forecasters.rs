use crate::arima::ArimaOrder;
use crate::error::{invalid, Result};
use crate::garch::{fit_arma_garch_with, ArmaGarchModel, GarchOrder};
use crate::hybrid::{fit_decomposition, fit_stat_feature, DecompositionModel, StatFeatureModel};
use crate::lstm::{make_windows, train, LstmConfig, TrainedLstm};
use crate::series::TimeSeries;

/// Iteration cap for warm-started coefficient refits.
pub const REFIT_ITERATIONS: usize = 500;
const FIT_ITERATIONS: usize = 2000;

/// The contract the rolling harness drives.
///
/// `fit` fixes the model structure and estimates coefficients. `refit`
/// re-estimates coefficients only and must leave the model untouched when it
/// fails. `predict_next` forecasts the value following `history`.
pub trait Forecaster: Send {
    fn fit(&mut self, train: &TimeSeries) -> Result<()>;
    fn refit(&mut self, history: &TimeSeries) -> Result<()>;
    fn predict_next(&self, history: &TimeSeries) -> Result<f64>;
    /// Human-readable structure, e.g. `ARIMA(1,0,1)-GARCH(1,1)`.
    fn structure(&self) -> String;
}

fn not_fitted() -> crate::Error {
    invalid("forecaster used before fit")
}

fn ag_structure(arima: ArimaOrder, garch: Option<GarchOrder>) -> String {
    match garch {
        Some(g) => format!("ARIMA{arima}-GARCH{g}"),
        None => format!("ARIMA{arima}"),
    }
}

/// Forecasts the last observed value.
#[derive(Debug, Clone, Default)]
pub struct RandomWalk;

impl Forecaster for RandomWalk {
    fn fit(&mut self, _train: &TimeSeries) -> Result<()> {
        Ok(())
    }

    fn refit(&mut self, _history: &TimeSeries) -> Result<()> {
        Ok(())
    }

    fn predict_next(&self, history: &TimeSeries) -> Result<f64> {
        Ok(history.last())
    }

    fn structure(&self) -> String {
        "random walk".into()
    }
}

/// ARIMA-GARCH (or plain ARIMA when `garch` is `None`).
#[derive(Debug, Clone)]
pub struct ArmaGarchForecaster {
    pub arima_order: ArimaOrder,
    pub garch_order: Option<GarchOrder>,
    pub model: Option<ArmaGarchModel>,
}

impl ArmaGarchForecaster {
    pub fn new(arima_order: ArimaOrder, garch_order: Option<GarchOrder>) -> Self {
        Self {
            arima_order,
            garch_order,
            model: None,
        }
    }
}

impl Forecaster for ArmaGarchForecaster {
    fn fit(&mut self, train: &TimeSeries) -> Result<()> {
        self.model = Some(fit_arma_garch_with(
            train,
            self.arima_order,
            self.garch_order,
            FIT_ITERATIONS,
        )?);
        Ok(())
    }

    fn refit(&mut self, history: &TimeSeries) -> Result<()> {
        let model = self.model.as_ref().ok_or_else(not_fitted)?;
        self.model = Some(model.refit(history, REFIT_ITERATIONS)?);
        Ok(())
    }

    fn predict_next(&self, history: &TimeSeries) -> Result<f64> {
        self.model.as_ref().ok_or_else(not_fitted)?.forecast_one(history)
    }

    fn structure(&self) -> String {
        ag_structure(self.arima_order, self.garch_order)
    }
}

/// LSTM on the series alone; trained once, never updated.
#[derive(Debug, Clone)]
pub struct LstmForecaster {
    pub config: LstmConfig,
    pub model: Option<TrainedLstm>,
}

impl LstmForecaster {
    pub fn new(config: LstmConfig) -> Self {
        Self {
            config: LstmConfig { input_dim: 1, ..config },
            model: None,
        }
    }
}

impl Forecaster for LstmForecaster {
    fn fit(&mut self, train_series: &TimeSeries) -> Result<()> {
        let set = make_windows(&[train_series.values()], self.config.lookback_k)?;
        self.model = Some(train(&self.config, &set)?);
        Ok(())
    }

    fn refit(&mut self, _history: &TimeSeries) -> Result<()> {
        Ok(())
    }

    fn predict_next(&self, history: &TimeSeries) -> Result<f64> {
        let model = self.model.as_ref().ok_or_else(not_fitted)?;
        let k = self.config.lookback_k;
        if history.len() < k {
            return Err(invalid(format!("history of {} is shorter than k={k}", history.len())));
        }
        let window: Vec<Vec<f64>> = history.values()[history.len() - k..].iter().map(|&v| vec![v]).collect();
        model.predict_one(&window)
    }

    fn structure(&self) -> String {
        format!("LSTM(k={},hidden={})", self.config.lookback_k, self.config.hidden_size)
    }
}

/// ARIMA-GARCH plus an LSTM on its residuals. Refits update the
/// ARIMA-GARCH coefficients; the network stays as trained.
#[derive(Debug, Clone)]
pub struct DecompositionForecaster {
    pub arima_order: ArimaOrder,
    pub garch_order: Option<GarchOrder>,
    pub config: LstmConfig,
    pub model: Option<DecompositionModel>,
}

impl DecompositionForecaster {
    pub fn new(arima_order: ArimaOrder, garch_order: Option<GarchOrder>, config: LstmConfig) -> Self {
        Self {
            arima_order,
            garch_order,
            config,
            model: None,
        }
    }
}

impl Forecaster for DecompositionForecaster {
    fn fit(&mut self, train_series: &TimeSeries) -> Result<()> {
        self.model = Some(fit_decomposition(
            train_series,
            self.arima_order,
            self.garch_order,
            &self.config,
        )?);
        Ok(())
    }

    fn refit(&mut self, history: &TimeSeries) -> Result<()> {
        let model = self.model.as_mut().ok_or_else(not_fitted)?;
        model.ag = model.ag.refit(history, REFIT_ITERATIONS)?;
        Ok(())
    }

    fn predict_next(&self, history: &TimeSeries) -> Result<f64> {
        self.model.as_ref().ok_or_else(not_fitted)?.predict_one(history)
    }

    fn structure(&self) -> String {
        format!(
            "{}+LSTM(k={},hidden={})",
            ag_structure(self.arima_order, self.garch_order),
            self.config.lookback_k,
            self.config.hidden_size
        )
    }
}

/// LSTM fed the series and the GARCH conditional variance.
#[derive(Debug, Clone)]
pub struct StatFeatureForecaster {
    pub arima_order: ArimaOrder,
    pub garch_order: GarchOrder,
    pub config: LstmConfig,
    pub model: Option<StatFeatureModel>,
}

impl StatFeatureForecaster {
    pub fn new(arima_order: ArimaOrder, garch_order: GarchOrder, config: LstmConfig) -> Self {
        Self {
            arima_order,
            garch_order,
            config,
            model: None,
        }
    }
}

impl Forecaster for StatFeatureForecaster {
    fn fit(&mut self, train_series: &TimeSeries) -> Result<()> {
        self.model = Some(fit_stat_feature(
            train_series,
            self.arima_order,
            self.garch_order,
            &self.config,
        )?);
        Ok(())
    }

    fn refit(&mut self, history: &TimeSeries) -> Result<()> {
        let model = self.model.as_mut().ok_or_else(not_fitted)?;
        model.ag = model.ag.refit(history, REFIT_ITERATIONS)?;
        Ok(())
    }

    fn predict_next(&self, history: &TimeSeries) -> Result<f64> {
        self.model.as_ref().ok_or_else(not_fitted)?.predict_one(history)
    }

    fn structure(&self) -> String {
        format!(
            "LSTM(k={},hidden={})+h from ARIMA{}-GARCH{}",
            self.config.lookback_k, self.config.hidden_size, self.arima_order, self.garch_order
        )
    }
}

/// Wraps a forecaster and ignores refits, keeping the coefficients from
/// the initial fit.
#[derive(Debug, Clone)]
pub struct FrozenCoefficients<F>(pub F);

impl<F: Forecaster> Forecaster for FrozenCoefficients<F> {
    fn fit(&mut self, train: &TimeSeries) -> Result<()> {
        self.0.fit(train)
    }

    fn refit(&mut self, _history: &TimeSeries) -> Result<()> {
        Ok(())
    }

    fn predict_next(&self, history: &TimeSeries) -> Result<f64> {
        self.0.predict_next(history)
    }

    fn structure(&self) -> String {
        self.0.structure()
    }
}
