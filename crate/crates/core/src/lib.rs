//! Hybrid statistical/neural time-series forecasting.
//!
//! The crate bundles the pieces needed to forecast a univariate series one
//! step ahead with ARIMA-GARCH models, a small LSTM, and two ways of
//! combining them:
//!
//! * [`hybrid::DecompositionModel`]: ARIMA-GARCH models the conditional mean
//!   and an LSTM learns what is left in its residuals.
//! * [`hybrid::StatFeatureModel`]: the GARCH conditional variance `h_t` is fed
//!   to an LSTM as a second input channel next to the series itself.
//!
//! [`eval`] runs the rolling one-step protocol (coefficients refit at every
//! step, orders frozen) and produces comparison reports.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arima;
pub mod error;
pub mod eval;
pub mod garch;
pub mod hybrid;
pub mod linalg;
pub mod lstm;
pub mod optim;
pub mod series;
pub mod simulate;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use series::TimeSeries;
