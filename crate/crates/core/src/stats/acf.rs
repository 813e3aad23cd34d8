use crate::error::{invalid, Error, Result};

use super::{is_constant, mean};

/// Sample autocorrelations `ρ_0..=ρ_max_lag` with the biased (`n`) denominator.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if max_lag >= n {
        return Err(invalid(format!("lag {max_lag} needs more than {n} observations")));
    }
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    if is_constant(x) {
        return Err(Error::ZeroVariance("autocorrelation of a constant series".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            let ck: f64 = centered[k..].iter().zip(&centered).map(|(a, b)| a * b).sum();
            ck / c0
        })
        .collect())
}

/// Partial autocorrelations by the Durbin-Levinson recursion; index 0 is 1.
pub fn pacf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(x, max_lag)?;
    Ok(durbin_levinson(&rho))
}

pub(crate) fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let max_lag = rho.len() - 1;
    let mut out = vec![1.0; max_lag + 1];
    let mut phi: Vec<f64> = Vec::new();
    let mut v: f64 = 1.0;
    for k in 1..=max_lag {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let kk = if v.abs() > 0.0 { num / v } else { 0.0 };
        let mut next: Vec<f64> = phi.iter().enumerate().map(|(j, p)| p - kk * phi[k - 2 - j]).collect();
        next.push(kk);
        phi = next;
        v *= 1.0 - kk * kk;
        out[k] = kk;
    }
    out
}
