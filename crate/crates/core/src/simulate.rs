//! Seeded generators for ARMA and ARMA-GARCH paths.
//!
//! All generators use ChaCha8 seeded from a `u64`, so a seed pins the output
//! on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arima::ArmaParams;
use crate::error::{invalid, Result};
use crate::garch::GarchParams;
use crate::series::TimeSeries;

/// Discarded warm-up draws before the first returned observation.
pub const BURN_IN: usize = 500;

/// `n` i.i.d. standard normal draws.
pub fn gaussian_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Driftless Gaussian random walk starting at zero.
pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    gaussian_noise(n, seed)
        .into_iter()
        .scan(0.0, |acc, z| {
            *acc += z;
            Some(*acc)
        })
        .collect()
}

/// Simulates `y_t = μ + Σ α_i y_{t-i} + e_t + Σ θ_j e_{t-j}` with Gaussian
/// innovations of variance `noise_variance`.
pub fn simulate_arma(params: &ArmaParams, n: usize, seed: u64) -> Result<TimeSeries> {
    let sigma = params.noise_variance.sqrt();
    let (y, _) = simulate_core(params, n, seed, |z, _| (sigma * z, params.noise_variance))?;
    TimeSeries::new(y)
}

/// Simulates an ARMA mean with GARCH innovations `e_t = z_t √h_t`.
pub fn simulate_garch(arma: &ArmaParams, garch: &GarchParams, n: usize, seed: u64) -> Result<TimeSeries> {
    simulate_garch_path(arma, garch, n, seed).map(|(y, _)| y)
}

/// [`simulate_garch`] also returning the conditional variances `h_t`.
pub fn simulate_garch_path(
    arma: &ArmaParams,
    garch: &GarchParams,
    n: usize,
    seed: u64,
) -> Result<(TimeSeries, Vec<f64>)> {
    let unconditional = garch.unconditional_variance();
    let mut u_hist = vec![unconditional.sqrt(); garch.lambdas.len()];
    let mut h_hist = vec![unconditional; garch.betas.len()];
    let (y, h) = simulate_core(arma, n, seed, |z, _| {
        let h = garch.next_variance(&u_hist, &h_hist);
        let e = z * h.sqrt();
        if !u_hist.is_empty() {
            u_hist.remove(0);
            u_hist.push(e);
        }
        if !h_hist.is_empty() {
            h_hist.remove(0);
            h_hist.push(h);
        }
        (e, h)
    })?;
    Ok((TimeSeries::new(y)?, h))
}

fn simulate_core<F>(params: &ArmaParams, n: usize, seed: u64, mut innovation: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64, usize) -> (f64, f64),
{
    if n == 0 {
        return Err(invalid("cannot simulate an empty series"));
    }
    if !params.is_stationary() {
        return Err(invalid("AR coefficients are explosive or have a unit root"));
    }
    let p = params.alphas.len();
    let q = params.thetas.len();
    let level = params.mu / (1.0 - params.alphas.iter().sum::<f64>());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = BURN_IN + n;
    let mut y = vec![level; p];
    let mut e = vec![0.0; q];
    let mut h_out = Vec::with_capacity(n);
    let mut y_out = Vec::with_capacity(n);
    for t in 0..total {
        let z: f64 = StandardNormal.sample(&mut rng);
        let (shock, h) = innovation(z, t);
        let value = params.predict_next(&y, &e) + shock;
        if p > 0 {
            y.remove(0);
            y.push(value);
        }
        if q > 0 {
            e.remove(0);
            e.push(shock);
        }
        if t >= BURN_IN {
            y_out.push(value);
            h_out.push(h);
        }
    }
    Ok((y_out, h_out))
}

/// Mean and variance parameters of the hybrid benchmark: a persistent
/// ARMA(1,1) mean with GARCH(1,1) innovations.
pub fn benchmark_params() -> (ArmaParams, GarchParams) {
    (
        ArmaParams::new(0.0, vec![0.95], vec![0.3], 1.0).expect("valid benchmark ARMA"),
        GarchParams::new(0.001, vec![0.2], vec![0.7]).expect("valid benchmark GARCH"),
    )
}

/// The hybrid benchmark series `y_t = x_t + 0.5 sin(0.2 t)`, where `x` is the
/// ARMA-GARCH path from [`benchmark_params`]. The sine is the nonlinear part a
/// single real AR root cannot follow, so it survives in the ARMA residuals.
pub fn benchmark_series(n: usize, seed: u64) -> Result<TimeSeries> {
    let (arma, garch) = benchmark_params();
    let x = simulate_garch(&arma, &garch, n, seed)?;
    let values = x
        .values()
        .iter()
        .enumerate()
        .map(|(t, v)| v + 0.5 * (0.2 * t as f64).sin())
        .collect();
    TimeSeries::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::acf;

    #[test]
    fn benchmark_is_path_plus_sine() {
        let (arma, garch) = benchmark_params();
        let x = simulate_garch(&arma, &garch, 50, 9).unwrap();
        let y = benchmark_series(50, 9).unwrap();
        for t in 0..50 {
            assert_eq!(y.values()[t], x.values()[t] + 0.5 * (0.2 * t as f64).sin());
        }
        assert_eq!(y, benchmark_series(50, 9).unwrap());
    }

    #[test]
    fn zero_noise_is_constant_mean() {
        let params = ArmaParams::new(5.0, vec![0.0], vec![], 0.0).unwrap();
        let y = simulate_arma(&params, 50, 1).unwrap();
        assert!(y.values().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn seeded_determinism() {
        let params = ArmaParams::new(0.1, vec![0.3], vec![0.2], 2.0).unwrap();
        assert_eq!(
            simulate_arma(&params, 100, 9).unwrap(),
            simulate_arma(&params, 100, 9).unwrap()
        );
        assert_ne!(
            simulate_arma(&params, 100, 9).unwrap(),
            simulate_arma(&params, 100, 10).unwrap()
        );
        let garch = GarchParams::new(0.1, vec![0.2], vec![0.7]).unwrap();
        assert_eq!(
            simulate_garch(&params, &garch, 100, 3).unwrap(),
            simulate_garch(&params, &garch, 100, 3).unwrap()
        );
    }

    #[test]
    fn ar1_autocorrelation() {
        let params = ArmaParams::new(0.0, vec![0.6], vec![], 1.0).unwrap();
        let y = simulate_arma(&params, 5000, 12).unwrap();
        let r = acf(y.values(), 1).unwrap();
        assert!((r[1] - 0.6).abs() < 0.05, "{}", r[1]);
    }

    #[test]
    fn explosive_rejected() {
        let params = ArmaParams::new(0.0, vec![1.1], vec![], 1.0).unwrap();
        assert!(simulate_arma(&params, 10, 1).is_err());
        let ok = ArmaParams::new(0.0, vec![0.1], vec![], 1.0).unwrap();
        assert!(simulate_arma(&ok, 0, 1).is_err());
    }

    #[test]
    fn degenerate_garch_is_plain_arma() {
        let w = 0.7;
        let arma = ArmaParams::new(0.2, vec![0.4], vec![0.1], w).unwrap();
        let garch = GarchParams::new(w, vec![0.0], vec![0.0]).unwrap();
        assert_eq!(
            simulate_garch(&arma, &garch, 300, 4).unwrap(),
            simulate_arma(&arma, 300, 4).unwrap()
        );
    }

    #[test]
    fn garch_innovations_are_heavy_tailed() {
        let arma = ArmaParams::new(0.0, vec![], vec![], 1.0).unwrap();
        let garch = GarchParams::new(0.1, vec![0.2], vec![0.7]).unwrap();
        let (y, h) = simulate_garch_path(&arma, &garch, 20_000, 8).unwrap();
        let x = y.values();
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64;
        let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / x.len() as f64;
        assert!(m4 / (m2 * m2) > 3.2, "kurtosis {}", m4 / (m2 * m2));
        assert!(h.iter().all(|&v| v > 0.0));
    }
}
