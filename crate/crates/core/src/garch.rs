//! GARCH(P, Q) conditional variance and its quasi-maximum-likelihood fit.
//!
//! `h_t = w + Σ_{j=1..P} λ_j u²_{t-j} + Σ_{i=1..Q} β_i h_{t-i}`, linear in the
//! lagged variances. Pre-sample `u²` and `h` are both set to the sample
//! variance of the residuals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arima::{fit_arima_with, ArimaFitOptions, ArimaModel, ArimaOrder};
use crate::error::{invalid, Error, Result};
use crate::optim::NelderMead;
use crate::series::TimeSeries;
use crate::stats::{acf, is_constant, variance};

/// Ceiling on `Σλ + Σβ` enforced by the parameter transform.
pub const PERSISTENCE_CAP: f64 = 0.999;
pub const MAX_GARCH_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GarchOrder {
    /// P: lagged squared residuals.
    pub arch: usize,
    /// Q: lagged conditional variances.
    pub garch: usize,
}

impl GarchOrder {
    pub fn new(arch: usize, garch: usize) -> Result<Self> {
        if arch + garch == 0 {
            return Err(invalid("GARCH order (0,0) has no terms"));
        }
        if arch == 0 {
            return Err(invalid(format!(
                "GARCH order (0,{garch}) has variance lags but no ARCH term"
            )));
        }
        if arch > MAX_GARCH_ORDER || garch > MAX_GARCH_ORDER {
            return Err(invalid(format!("GARCH order exceeds {MAX_GARCH_ORDER}")));
        }
        Ok(Self { arch, garch })
    }

    pub fn parameter_count(&self) -> usize {
        1 + self.arch + self.garch
    }
}

impl std::fmt::Display for GarchOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.arch, self.garch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub w: f64,
    pub lambdas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl GarchParams {
    pub fn new(w: f64, lambdas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        GarchOrder::new(lambdas.len(), betas.len())?;
        if !(w > 0.0) || !w.is_finite() {
            return Err(invalid(format!("variance intercept {w} must be positive")));
        }
        if lambdas.iter().chain(&betas).any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(invalid("GARCH coefficients must be non-negative"));
        }
        let persistence: f64 = lambdas.iter().chain(&betas).sum();
        if persistence >= 1.0 {
            return Err(invalid(format!("persistence {persistence} is not below one")));
        }
        Ok(Self { w, lambdas, betas })
    }

    pub fn order(&self) -> GarchOrder {
        GarchOrder {
            arch: self.lambdas.len(),
            garch: self.betas.len(),
        }
    }

    pub fn persistence(&self) -> f64 {
        self.lambdas.iter().chain(&self.betas).sum()
    }

    /// `w / (1 - Σλ - Σβ)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.w / (1.0 - self.persistence())
    }

    /// Next variance from recent residuals and variances, both oldest first.
    pub(crate) fn next_variance(&self, recent_u: &[f64], recent_h: &[f64]) -> f64 {
        let mut h = self.w;
        for (j, l) in self.lambdas.iter().enumerate() {
            let u = recent_u[recent_u.len() - 1 - j];
            h += l * u * u;
        }
        for (i, b) in self.betas.iter().enumerate() {
            h += b * recent_h[recent_h.len() - 1 - i];
        }
        h
    }
}

/// Runs the variance recursion over `residuals`.
pub fn conditional_variance(params: &GarchParams, residuals: &[f64]) -> Vec<f64> {
    let seed = if residuals.is_empty() { 0.0 } else { variance(residuals) };
    variance_recursion(params.w, &params.lambdas, &params.betas, residuals, seed)
}

fn variance_recursion(w: f64, lambdas: &[f64], betas: &[f64], u: &[f64], seed: f64) -> Vec<f64> {
    let mut h = vec![0.0; u.len()];
    for t in 0..u.len() {
        let mut ht = w;
        for (j, l) in lambdas.iter().enumerate() {
            let lag = j + 1;
            ht += l * if t >= lag { u[t - lag] * u[t - lag] } else { seed };
        }
        for (i, b) in betas.iter().enumerate() {
            let lag = i + 1;
            ht += b * if t >= lag { h[t - lag] } else { seed };
        }
        h[t] = ht;
    }
    h
}

/// `h_{t+1}` given the most recent residuals and variances (oldest first).
pub fn forecast_variance_one(params: &GarchParams, recent_u: &[f64], recent_h: &[f64]) -> Result<f64> {
    let order = params.order();
    if recent_u.len() < order.arch || recent_h.len() < order.garch {
        return Err(invalid(format!(
            "GARCH{order} needs {} residuals and {} variances",
            order.arch, order.garch
        )));
    }
    Ok(params.next_variance(recent_u, recent_h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub order: GarchOrder,
    #[serde(flatten)]
    pub params: GarchParams,
    /// Fitted `h_t`, one per residual.
    #[serde(skip)]
    pub h: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
}

fn gaussian_nll(u: &[f64], h: &[f64]) -> f64 {
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    0.5 * u.iter().zip(h).map(|(x, v)| ln2pi + v.ln() + x * x / v).sum::<f64>()
}

/// Maps unconstrained `(a, z_1..z_{P+Q})` to `w = e^a` and coefficients that
/// are positive and sum below [`PERSISTENCE_CAP`].
fn decode(x: &[f64], arch: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let w = x[0].exp();
    let exps: Vec<f64> = x[1..].iter().map(|z| z.exp()).collect();
    let denom = 1.0 + exps.iter().sum::<f64>();
    let coefs: Vec<f64> = exps.iter().map(|e| PERSISTENCE_CAP * e / denom).collect();
    (w, coefs[..arch].to_vec(), coefs[arch..].to_vec())
}

fn encode(w: f64, lambdas: &[f64], betas: &[f64]) -> Vec<f64> {
    let floor = 1e-6;
    let coefs: Vec<f64> = lambdas.iter().chain(betas).map(|c| c.max(floor)).collect();
    let sum: f64 = coefs.iter().sum();
    let slack = (PERSISTENCE_CAP - sum).max(floor);
    let mut x = vec![w.max(1e-300).ln()];
    x.extend(coefs.iter().map(|c| (c / slack).ln()));
    x
}

fn qmle_objective(u: &[f64], seed: f64, arch: usize, x: &[f64]) -> f64 {
    let (w, lambdas, betas) = decode(x, arch);
    if !(w > 0.0) || !w.is_finite() {
        return f64::INFINITY;
    }
    let h = variance_recursion(w, &lambdas, &betas, u, seed);
    let v = gaussian_nll(u, &h);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn check_residuals(u: &[f64], order: GarchOrder) -> Result<f64> {
    let floor = order.arch + order.garch + 5;
    if u.len() <= floor {
        return Err(invalid(format!(
            "GARCH{order} needs more than {floor} residuals, got {}",
            u.len()
        )));
    }
    let var = variance(u);
    if is_constant(u) {
        return Err(Error::ZeroVariance("residuals are constant".into()));
    }
    Ok(var)
}

fn split_evenly(total: f64, parts: usize) -> Vec<f64> {
    vec![total / parts.max(1) as f64; parts]
}

fn starting_points(u: &[f64], var: f64, order: GarchOrder) -> Vec<Vec<f64>> {
    let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    let (rho1, rho2) = match acf(&sq, 2) {
        Ok(r) => (r[1], r[2]),
        Err(_) => (0.0, 0.0),
    };
    let moment = if order.garch == 0 {
        let lambda = rho1.clamp(0.02, 0.9);
        (split_evenly(lambda, order.arch), Vec::new())
    } else {
        let persistence = if rho1 > 0.05 {
            (rho2 / rho1).clamp(0.2, 0.95)
        } else {
            0.5
        };
        let lambda = rho1.clamp(0.02, 0.5 * persistence);
        (
            split_evenly(lambda, order.arch),
            split_evenly(persistence - lambda, order.garch),
        )
    };
    let fixed = if order.garch == 0 {
        (split_evenly(0.05, order.arch), Vec::new())
    } else {
        (split_evenly(0.05, order.arch), split_evenly(0.90, order.garch))
    };
    [moment, fixed]
        .into_iter()
        .map(|(l, b)| {
            let total: f64 = l.iter().chain(&b).sum();
            encode(var * (1.0 - total), &l, &b)
        })
        .collect()
}

fn finish(u: &[f64], seed: f64, order: GarchOrder, x: &[f64]) -> Result<GarchFit> {
    let (w, lambdas, betas) = decode(x, order.arch);
    let params = GarchParams::new(w, lambdas, betas)?;
    let h = variance_recursion(params.w, &params.lambdas, &params.betas, u, seed);
    let loglik = -gaussian_nll(u, &h);
    let aic = 2.0 * order.parameter_count() as f64 - 2.0 * loglik;
    Ok(GarchFit {
        order,
        params,
        h,
        loglik,
        aic,
    })
}

const SIMPLEX_STEP: f64 = 0.5;

/// Fits GARCH(P, Q) to a residual series by Gaussian QMLE.
pub fn fit_garch(residuals: &[f64], order: GarchOrder) -> Result<GarchFit> {
    fit_garch_with(residuals, order, 2000)
}

pub fn fit_garch_with(residuals: &[f64], order: GarchOrder, max_iterations: usize) -> Result<GarchFit> {
    let var = check_residuals(residuals, order)?;
    let nm = NelderMead::with_max_iterations(max_iterations);
    let steps = vec![SIMPLEX_STEP; order.parameter_count()];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut best_any: Option<(Vec<f64>, f64, usize)> = None;
    for start in starting_points(residuals, var, order) {
        let m = nm.minimize(|x| qmle_objective(residuals, var, order.arch, x), &start, &steps);
        if best_any.as_ref().is_none_or(|b| m.value < b.1) {
            best_any = Some((m.x.clone(), m.value, m.iterations));
        }
        if m.converged && m.value.is_finite() && best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((m.x, m.value));
        }
    }
    match best {
        Some((x, _)) => finish(residuals, var, order, &x),
        None => {
            let (x, value, iterations) = best_any.expect("two starts");
            Err(Error::Convergence {
                iterations,
                best_value: value,
                best_params: x,
            })
        }
    }
}

impl GarchFit {
    /// Re-estimates on new residuals from the current parameters.
    pub fn refit(&self, residuals: &[f64], max_iterations: usize) -> Result<GarchFit> {
        let var = check_residuals(residuals, self.order)?;
        let nm = NelderMead::with_max_iterations(max_iterations);
        let start = encode(self.params.w, &self.params.lambdas, &self.params.betas);
        let steps = vec![SIMPLEX_STEP; self.order.parameter_count()];
        let m = nm.minimize(|x| qmle_objective(residuals, var, self.order.arch, x), &start, &steps);
        if !m.converged || !m.value.is_finite() {
            return Err(Error::Convergence {
                iterations: m.iterations,
                best_value: m.value,
                best_params: m.x,
            });
        }
        finish(residuals, var, self.order, &m.x)
    }
}

/// AIC over `P ∈ 1..=p_max`, `Q ∈ 0..=q_max`. Ties go to the smaller
/// `P + Q`, then the smaller `Q`.
pub fn garch_order_select(residuals: &[f64], p_max: usize, q_max: usize) -> Result<GarchOrder> {
    garch_order_table(residuals, p_max, q_max).and_then(|table| {
        let mut best: Option<(f64, usize, usize, GarchOrder)> = None;
        let mut failures = Vec::new();
        for (order, fit) in table {
            match fit {
                Ok(aic) => {
                    let key = (aic, order.arch + order.garch, order.garch, order);
                    if best.as_ref().is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                        best = Some(key);
                    }
                }
                Err(e) => failures.push((format!("GARCH{order}"), e.to_string())),
            }
        }
        best.map(|b| b.3).ok_or(Error::Selection(failures))
    })
}

/// AIC (or the failure) of each grid candidate, in grid order.
pub fn garch_order_table(residuals: &[f64], p_max: usize, q_max: usize) -> Result<Vec<(GarchOrder, Result<f64>)>> {
    if p_max == 0 {
        return Err(invalid("GARCH order search needs p_max >= 1"));
    }
    let grid: Vec<GarchOrder> = (1..=p_max)
        .flat_map(|p| (0..=q_max).map(move |q| GarchOrder { arch: p, garch: q }))
        .collect();
    Ok(grid
        .par_iter()
        .map(|&order| (order, fit_garch(residuals, order).map(|f| f.aic)))
        .collect())
}

/// ARIMA conditional mean with optional GARCH errors, fitted in two stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaGarchModel {
    pub arima: ArimaModel,
    pub garch: Option<GarchFit>,
    /// ARIMA AIC plus GARCH AIC when present.
    pub aic_total: f64,
}

/// Fits ARIMA on `series`, then GARCH on its residuals.
pub fn fit_arma_garch(series: &TimeSeries, arima_order: ArimaOrder, garch_order: GarchOrder) -> Result<ArmaGarchModel> {
    fit_arma_garch_with(series, arima_order, Some(garch_order), 2000)
}

/// Like [`fit_arma_garch`]; `garch_order: None` skips the variance stage.
pub fn fit_arma_garch_with(
    series: &TimeSeries,
    arima_order: ArimaOrder,
    garch_order: Option<GarchOrder>,
    max_iterations: usize,
) -> Result<ArmaGarchModel> {
    let arima = fit_arima_with(series, arima_order, &ArimaFitOptions { max_iterations })?;
    let garch = match garch_order {
        Some(order) => Some(fit_garch_with(arima.residuals.values(), order, max_iterations)?),
        None => None,
    };
    Ok(ArmaGarchModel::from_parts(arima, garch))
}

impl ArmaGarchModel {
    pub fn from_parts(arima: ArimaModel, garch: Option<GarchFit>) -> Self {
        let aic_total = arima.aic + garch.as_ref().map_or(0.0, |g| g.aic);
        Self {
            arima,
            garch,
            aic_total,
        }
    }

    /// In-sample conditional variances; constant `σ²` without a GARCH stage.
    pub fn h_series(&self) -> Vec<f64> {
        match &self.garch {
            Some(g) => g.h.clone(),
            None => vec![self.arima.params.noise_variance; self.arima.residuals.len()],
        }
    }

    /// Conditional variances implied for `residuals` under the current
    /// coefficients (constant without a GARCH stage).
    pub fn variance_path(&self, residuals: &[f64]) -> Vec<f64> {
        match &self.garch {
            Some(g) => conditional_variance(&g.params, residuals),
            None => vec![self.arima.params.noise_variance; residuals.len()],
        }
    }

    pub fn forecast_one(&self, history: &TimeSeries) -> Result<f64> {
        self.arima.forecast_one(history)
    }

    /// Refits both stages on `series` with orders frozen, warm-started.
    pub fn refit(&self, series: &TimeSeries, max_iterations: usize) -> Result<ArmaGarchModel> {
        let arima = self.arima.refit(series, max_iterations)?;
        let garch = match &self.garch {
            Some(g) => Some(g.refit(arima.residuals.values(), max_iterations)?),
            None => None,
        };
        Ok(Self::from_parts(arima, garch))
    }
}
