//! Ordinary least squares on top of nalgebra's QR decomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Centered R², `1 - SSR / SST`.
    pub r_squared: f64,
    /// `SSR / (n - k)`.
    pub sigma2: f64,
}

impl OlsFit {
    pub fn t_ratio(&self, i: usize) -> f64 {
        self.coefficients[i] / self.standard_errors[i]
    }
}

/// Fits `y = X b + e`. `rows` holds one regressor row per observation.
pub fn ols(y: &[f64], rows: &[Vec<f64>]) -> Result<OlsFit> {
    let n = y.len();
    if rows.len() != n {
        return Err(invalid(format!("{} rows for {n} observations", rows.len())));
    }
    let k = rows.first().map_or(0, Vec::len);
    if k == 0 || n <= k {
        return Err(invalid(format!(
            "least squares needs more observations ({n}) than regressors ({k})"
        )));
    }
    let x = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);

    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= scale * 1e-12) {
        return Err(Error::DegenerateData("regressor matrix is rank deficient".into()));
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::DegenerateData("singular triangular factor".into()))?;

    let fitted = &x * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let sigma2 = ssr / (n - k) as f64;

    // (X'X)^-1 = R^-1 R^-T.
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateData("singular triangular factor".into()))?;
    let cov = &r_inv * r_inv.transpose();
    let standard_errors = (0..k).map(|i| (sigma2 * cov[(i, i)]).sqrt()).collect();

    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        standard_errors,
        residuals,
        r_squared: if sst > 0.0 { 1.0 - ssr / sst } else { 0.0 },
        sigma2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let y: Vec<f64> = (0..10).map(|i| 2.0 + 3.0 * i as f64).collect();
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let fit = ols(&y, &rows).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_errors_match_closed_form() {
        // Simple regression: se(slope) = sqrt(sigma2 / Sxx).
        let xs = [1.0, 2.0, 4.0, 5.0, 7.0, 8.0];
        let y = [1.2, 1.9, 4.4, 4.8, 7.5, 7.7];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let fit = ols(&y, &rows).unwrap();
        let mx = xs.iter().sum::<f64>() / 6.0;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        assert!((fit.standard_errors[1] - (fit.sigma2 / sxx).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, 2.0, i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        assert!(matches!(ols(&y, &rows), Err(Error::DegenerateData(_))));
    }
}
