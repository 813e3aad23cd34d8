//! ARIMA estimation by conditional sum of squares.
//!
//! The working series `w = Δ^d y` follows
//! `w_t = μ + Σ α_i w_{t-i} + e_t + Σ θ_j e_{t-j}`. Residuals are computed
//! recursively over the whole working series with pre-sample errors set to
//! zero and pre-sample observations set to the sample mean of `w`, so every
//! candidate order is scored on the same number of terms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::ols;
use crate::optim::NelderMead;
use crate::series::{difference_values, TimeSeries};
use crate::stats::{adf_test, is_constant, mean, variance, LagOrder, TestResult};

/// Upper bound on each of p, d and q.
pub const MAX_ORDER: usize = 10;
/// Box constraint on AR and MA coefficients during estimation.
pub const COEFFICIENT_BOUND: f64 = 2.0;
/// Iteration cap used for warm-started coefficient refits.
pub const REFIT_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if p > MAX_ORDER || d > MAX_ORDER || q > MAX_ORDER {
            return Err(invalid(format!("order ({p},{d},{q}) exceeds the cap of {MAX_ORDER}")));
        }
        Ok(Self { p, d, q })
    }

    /// Number of estimated parameters counted by the AIC: `p + q + 2`.
    pub fn parameter_count(&self) -> usize {
        self.p + self.q + 2
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaParams {
    pub mu: f64,
    pub alphas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub noise_variance: f64,
}

impl ArmaParams {
    /// Fitted models always carry a positive variance; zero is accepted here
    /// so deterministic paths can be simulated.
    pub fn new(mu: f64, alphas: Vec<f64>, thetas: Vec<f64>, noise_variance: f64) -> Result<Self> {
        let all_finite =
            mu.is_finite() && noise_variance.is_finite() && alphas.iter().chain(&thetas).all(|v| v.is_finite());
        if !all_finite {
            return Err(invalid("ARMA parameters must be finite"));
        }
        if noise_variance < 0.0 {
            return Err(invalid(format!("noise variance {noise_variance} is negative")));
        }
        Ok(Self {
            mu,
            alphas,
            thetas,
            noise_variance,
        })
    }

    /// True when every root of `1 - Σ α_i z^i` lies outside the unit circle.
    pub fn is_stationary(&self) -> bool {
        roots_outside_unit_circle(&self.alphas)
    }

    /// True when every root of `1 + Σ θ_j z^j` lies outside the unit circle.
    pub fn is_invertible(&self) -> bool {
        let negated: Vec<f64> = self.thetas.iter().map(|t| -t).collect();
        roots_outside_unit_circle(&negated)
    }

    /// One-step conditional mean of the working series given recent values
    /// and errors (both oldest first, at least `p` and `q` long).
    pub fn predict_next(&self, recent_w: &[f64], recent_e: &[f64]) -> f64 {
        let ar: f64 = self
            .alphas
            .iter()
            .enumerate()
            .map(|(i, a)| a * recent_w[recent_w.len() - 1 - i])
            .sum();
        let ma: f64 = self
            .thetas
            .iter()
            .enumerate()
            .map(|(j, t)| t * recent_e[recent_e.len() - 1 - j])
            .sum();
        self.mu + ar + ma
    }

    fn to_vector(&self) -> Vec<f64> {
        let mut v = vec![self.mu];
        v.extend(&self.alphas);
        v.extend(&self.thetas);
        v
    }

    fn from_vector(v: &[f64], p: usize) -> (f64, &[f64], &[f64]) {
        (v[0], &v[1..1 + p], &v[1 + p..])
    }
}

/// Schur-Cohn check via the Levinson step-down recursion: the polynomial
/// `1 - Σ φ_i z^i` has all roots outside the unit circle iff every
/// reflection coefficient has modulus below one.
pub(crate) fn roots_outside_unit_circle(phi: &[f64]) -> bool {
    let mut a: Vec<f64> = phi.to_vec();
    while let Some(&last) = a.last() {
        if last == 0.0 {
            a.pop();
        } else {
            break;
        }
    }
    while !a.is_empty() {
        let k = a.len();
        let r = a[k - 1];
        if r.abs() >= 1.0 {
            return false;
        }
        let denom = 1.0 - r * r;
        a = (0..k - 1).map(|j| (a[j] + r * a[k - 2 - j]) / denom).collect();
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    #[serde(flatten)]
    pub params: ArmaParams,
    /// First `d` observations of the training series.
    pub anchors: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub stationary: bool,
    pub invertible: bool,
    /// In-sample `e_t` over the working (differenced) series.
    pub residuals: TimeSeries,
}

#[derive(Debug, Clone)]
pub struct ArimaFitOptions {
    pub max_iterations: usize,
}

impl Default for ArimaFitOptions {
    fn default() -> Self {
        Self { max_iterations: 2000 }
    }
}

/// CSS residuals of the working series under the given coefficients.
pub fn css_residuals(w: &[f64], mu: f64, alphas: &[f64], thetas: &[f64]) -> Vec<f64> {
    let pre = mean(w);
    let mut e = vec![0.0; w.len()];
    for t in 0..w.len() {
        let mut pred = mu;
        for (i, a) in alphas.iter().enumerate() {
            let lag = i + 1;
            pred += a * if t >= lag { w[t - lag] } else { pre };
        }
        for (j, th) in thetas.iter().enumerate() {
            let lag = j + 1;
            if t >= lag {
                pred += th * e[t - lag];
            }
        }
        e[t] = w[t] - pred;
    }
    e
}

fn css_objective(w: &[f64], p: usize, v: &[f64]) -> f64 {
    let (mu, alphas, thetas) = ArmaParams::from_vector(v, p);
    if alphas.iter().chain(thetas).any(|c| c.abs() > COEFFICIENT_BOUND) {
        return f64::INFINITY;
    }
    let ss: f64 = css_residuals(w, mu, alphas, thetas).iter().map(|e| e * e).sum();
    if ss.is_finite() {
        ss
    } else {
        f64::INFINITY
    }
}

fn working_series(series: &TimeSeries, order: ArimaOrder) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= order.p + order.q + order.d + 2 {
        return Err(invalid(format!(
            "ARIMA{order} needs more than {} observations, got {n}",
            order.p + order.q + order.d + 2
        )));
    }
    Ok(difference_values(series.values(), order.d))
}

/// Fits an ARIMA model with the default options.
pub fn fit_arima(series: &TimeSeries, order: ArimaOrder) -> Result<ArimaModel> {
    fit_arima_with(series, order, &ArimaFitOptions::default())
}

/// Fits by minimizing the conditional sum of squares from three
/// deterministic starts (zeros, Hannan-Rissanen moments, half the moments).
pub fn fit_arima_with(series: &TimeSeries, order: ArimaOrder, options: &ArimaFitOptions) -> Result<ArimaModel> {
    let w = working_series(series, order)?;
    if order.p + order.q == 0 {
        return closed_form_mean(series, order, &w);
    }
    let starts = starting_points(&w, order);
    let steps = simplex_steps(&w, order);
    let nm = NelderMead::with_max_iterations(options.max_iterations);

    let mut best_converged: Option<(Vec<f64>, f64)> = None;
    let mut best_any: Option<(Vec<f64>, f64, usize)> = None;
    for start in &starts {
        let m = nm.minimize(|v| css_objective(&w, order.p, v), start, &steps);
        if best_any.as_ref().is_none_or(|b| m.value < b.1) {
            best_any = Some((m.x.clone(), m.value, m.iterations));
        }
        if m.converged && m.value.is_finite() && best_converged.as_ref().is_none_or(|b| m.value < b.1) {
            best_converged = Some((m.x, m.value));
        }
    }
    match best_converged {
        Some((x, _)) => assemble(series, order, &w, &x),
        None => {
            let (x, value, iterations) = best_any.expect("at least one start");
            Err(Error::Convergence {
                iterations,
                best_value: value,
                best_params: x,
            })
        }
    }
}

impl ArimaModel {
    /// Re-estimates the coefficients on `series` with the order held fixed,
    /// starting from the current coefficients.
    pub fn refit(&self, series: &TimeSeries, max_iterations: usize) -> Result<ArimaModel> {
        let order = self.order;
        let w = working_series(series, order)?;
        if order.p + order.q == 0 {
            return closed_form_mean(series, order, &w);
        }
        let nm = NelderMead::with_max_iterations(max_iterations);
        let start = self.params.to_vector();
        let m = nm.minimize(|v| css_objective(&w, order.p, v), &start, &simplex_steps(&w, order));
        if !m.converged || !m.value.is_finite() {
            return Err(Error::Convergence {
                iterations: m.iterations,
                best_value: m.value,
                best_params: m.x,
            });
        }
        assemble(series, order, &w, &m.x)
    }

    /// Working series `Δ^d y` of `series` (at least one value required).
    fn working(&self, series: &TimeSeries) -> Result<Vec<f64>> {
        let o = self.order;
        let need = (o.p + o.d + o.q).max(o.d + 1);
        if series.len() < need {
            return Err(invalid(format!(
                "ARIMA{o} needs at least {need} observations of history, got {}",
                series.len()
            )));
        }
        Ok(difference_values(series.values(), o.d))
    }

    /// One-step-ahead conditional mean in the units of `history`.
    pub fn forecast_one(&self, history: &TimeSeries) -> Result<f64> {
        let w = self.working(history)?;
        let e = css_residuals(&w, self.params.mu, &self.params.alphas, &self.params.thetas);
        let pre = mean(&w);
        let mut recent_w = vec![pre; self.order.p.saturating_sub(w.len())];
        recent_w.extend_from_slice(&w);
        let mut recent_e = vec![0.0; self.order.q.saturating_sub(e.len())];
        recent_e.extend_from_slice(&e);
        let next_w = self.params.predict_next(&recent_w, &recent_e);
        Ok(integrate_forecast(history.values(), self.order.d, next_w))
    }

    /// CSS residuals of `series` under this model's coefficients.
    pub fn residuals(&self, series: &TimeSeries) -> Result<TimeSeries> {
        let w = self.working(series)?;
        TimeSeries::new(css_residuals(
            &w,
            self.params.mu,
            &self.params.alphas,
            &self.params.thetas,
        ))
    }

    /// In-sample fitted values in original units for observations `d..n`,
    /// i.e. what the model predicted for `y_t` before seeing it.
    pub fn fitted_values(&self, series: &TimeSeries) -> Result<Vec<f64>> {
        let w = self.working(series)?;
        let e = css_residuals(&w, self.params.mu, &self.params.alphas, &self.params.thetas);
        let y = series.values();
        let d = self.order.d;
        let weights = binomial_offsets(d);
        Ok((0..w.len())
            .map(|i| {
                let t = i + d;
                let predicted_w = w[i] - e[i];
                let offset: f64 = weights.iter().enumerate().map(|(k, c)| c * y[t - 1 - k]).sum();
                predicted_w + offset
            })
            .collect())
    }
}

/// `y_t - Δ^d y_t = Σ_{k=1..d} c_k y_{t-k}` with `c_k = -(-1)^k C(d,k)`.
fn binomial_offsets(d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(d);
    let mut binom = 1.0;
    for k in 1..=d {
        binom = binom * (d + 1 - k) as f64 / k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out.push(sign * binom);
    }
    out
}

/// Turns a forecast of `Δ^d y_{n+1}` into a forecast of `y_{n+1}`.
fn integrate_forecast(y: &[f64], d: usize, next_w: f64) -> f64 {
    let mut forecast = next_w;
    for level in (0..d).rev() {
        let lvl = difference_values(y, level);
        forecast += lvl[lvl.len() - 1];
    }
    forecast
}

fn closed_form_mean(series: &TimeSeries, order: ArimaOrder, w: &[f64]) -> Result<ArimaModel> {
    let mu = mean(w);
    if is_constant(w) {
        return Err(Error::ZeroVariance("working series is constant".into()));
    }
    assemble(series, order, w, &[mu])
}

fn assemble(series: &TimeSeries, order: ArimaOrder, w: &[f64], v: &[f64]) -> Result<ArimaModel> {
    let (mu, alphas, thetas) = ArmaParams::from_vector(v, order.p);
    let e = css_residuals(w, mu, alphas, thetas);
    let n = e.len() as f64;
    let sigma2 = e.iter().map(|x| x * x).sum::<f64>() / n;
    if !(sigma2 > 0.0) {
        return Err(Error::ZeroVariance("fitted residuals are identically zero".into()));
    }
    let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let aic = 2.0 * order.parameter_count() as f64 - 2.0 * loglik;
    let params = ArmaParams::new(mu, alphas.to_vec(), thetas.to_vec(), sigma2)?;
    Ok(ArimaModel {
        order,
        stationary: params.is_stationary(),
        invertible: params.is_invertible(),
        params,
        anchors: series.values()[..order.d].to_vec(),
        loglik,
        aic,
        residuals: TimeSeries::new(e)?,
    })
}

fn simplex_steps(w: &[f64], order: ArimaOrder) -> Vec<f64> {
    let sd = variance(w).sqrt();
    let mut steps = vec![if sd > 0.0 { 0.1 * sd } else { 0.1 }];
    steps.extend(std::iter::repeat_n(0.1, order.p + order.q));
    steps
}

fn starting_points(w: &[f64], order: ArimaOrder) -> Vec<Vec<f64>> {
    let m = mean(w);
    let mut zeros = vec![m];
    zeros.extend(std::iter::repeat_n(0.0, order.p + order.q));
    let mut starts = vec![zeros];
    if let Some(moments) = hannan_rissanen(w, order) {
        let half: Vec<f64> = moments[1..].iter().map(|c| 0.5 * c).collect();
        let ar_sum: f64 = half[..order.p].iter().sum();
        let mut halved = vec![m * (1.0 - ar_sum)];
        halved.extend(half);
        starts.push(moments);
        starts.push(halved);
    }
    starts
}

/// Two-stage regression estimates: a long autoregression supplies proxy
/// innovations, then `w_t` is regressed on its own lags and lagged proxies.
fn hannan_rissanen(w: &[f64], order: ArimaOrder) -> Option<Vec<f64>> {
    let n = w.len();
    let (p, q) = (order.p, order.q);
    let clamp = |c: f64| c.clamp(-0.99, 0.99);

    let innovations: Option<(usize, Vec<f64>)> = if q == 0 {
        None
    } else {
        let long = (p + q).max((2.0 * (n as f64).ln()) as usize).min(n / 4);
        if long == 0 {
            return None;
        }
        let rows: Vec<Vec<f64>> = (long..n)
            .map(|t| {
                let mut r = vec![1.0];
                r.extend((1..=long).map(|i| w[t - i]));
                r
            })
            .collect();
        let fit = ols(&w[long..], &rows).ok()?;
        Some((long, fit.residuals))
    };

    let first = match &innovations {
        Some((long, _)) => (long + q).max(p),
        None => p,
    };
    if n <= first + p + q + 2 {
        return None;
    }
    let rows: Vec<Vec<f64>> = (first..n)
        .map(|t| {
            let mut r = vec![1.0];
            r.extend((1..=p).map(|i| w[t - i]));
            if let Some((long, resid)) = &innovations {
                r.extend((1..=q).map(|j| resid[t - j - long]));
            }
            r
        })
        .collect();
    let fit = ols(&w[first..], &rows).ok()?;
    let mut v = vec![fit.coefficients[0]];
    v.extend(fit.coefficients[1..].iter().map(|&c| clamp(c)));
    Some(v)
}

/// Outcome of [`select_order`]: the chosen order plus the evidence.
#[derive(Debug, Clone, Serialize)]
pub struct OrderSelection {
    pub order: ArimaOrder,
    /// ADF results on `Δ^0 y, Δ^1 y, ...` up to the chosen `d`.
    pub adf_tests: Vec<TestResult>,
    pub candidates: Vec<CandidateFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateFit {
    pub order: ArimaOrder,
    pub aic: Option<f64>,
    pub failure: Option<String>,
}

/// Chooses `d` by repeated ADF tests and `(p, q)` by minimum AIC.
pub fn auto_order(series: &TimeSeries, p_max: usize, q_max: usize, d_max: usize) -> Result<ArimaOrder> {
    select_order(series, p_max, q_max, d_max, &ArimaFitOptions::default()).map(|s| s.order)
}

/// [`auto_order`] with the full candidate table.
///
/// `d` is the smallest number of differences whose ADF test rejects a unit
/// root at 5%, or `d_max` if none does. Ties in AIC go to the smaller
/// `p + q`, then the smaller `p`.
pub fn select_order(
    series: &TimeSeries,
    p_max: usize,
    q_max: usize,
    d_max: usize,
    options: &ArimaFitOptions,
) -> Result<OrderSelection> {
    if p_max > MAX_ORDER || q_max > MAX_ORDER || d_max > MAX_ORDER {
        return Err(invalid(format!("order caps exceed {MAX_ORDER}")));
    }
    let mut adf_tests = Vec::new();
    let mut d = d_max;
    for candidate in 0..=d_max {
        let w = difference_values(series.values(), candidate);
        let result = adf_test(&w, LagOrder::Auto)?;
        let reject = result.reject_at_5pct;
        adf_tests.push(result);
        if reject {
            d = candidate;
            break;
        }
    }

    let grid: Vec<ArimaOrder> = (0..=p_max)
        .flat_map(|p| (0..=q_max).map(move |q| ArimaOrder { p, d, q }))
        .collect();
    let fits: Vec<Result<ArimaModel>> = grid
        .par_iter()
        .map(|&order| fit_arima_with(series, order, options))
        .collect();

    let mut best: Option<(f64, usize, usize, ArimaOrder)> = None;
    let mut candidates = Vec::with_capacity(grid.len());
    for (order, fit) in grid.iter().zip(fits) {
        match fit {
            Ok(model) => {
                let key = (model.aic, order.p + order.q, order.p, *order);
                let better = match &best {
                    None => true,
                    Some(b) => (key.0, key.1, key.2) < (b.0, b.1, b.2),
                };
                if better {
                    best = Some(key);
                }
                candidates.push(CandidateFit {
                    order: *order,
                    aic: Some(model.aic),
                    failure: None,
                });
            }
            Err(e) => candidates.push(CandidateFit {
                order: *order,
                aic: None,
                failure: Some(e.to_string()),
            }),
        }
    }
    match best {
        Some((_, _, _, order)) => Ok(OrderSelection {
            order,
            adf_tests,
            candidates,
        }),
        None => Err(Error::Selection(
            candidates
                .into_iter()
                .map(|c| (format!("ARIMA{}", c.order), c.failure.unwrap_or_default()))
                .collect(),
        )),
    }
}
