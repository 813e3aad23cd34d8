//! Critical values for the unit-root tests.

/// Sample sizes of the Dickey-Fuller table columns (`f64::INFINITY` last).
pub(crate) const DF_SAMPLE_SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];

/// Cumulative probabilities of the Dickey-Fuller table rows.
pub(crate) const DF_PROBABILITIES: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];

/// Quantiles of the Dickey-Fuller t-statistic, regression with a constant
/// and no trend. Row = probability, column = sample size.
#[allow(clippy::approx_constant)] // -3.14 is a table entry, not pi
pub(crate) const DF_CONSTANT: [[f64; 6]; 8] = [
    [-3.75, -3.58, -3.51, -3.46, -3.44, -3.43],
    [-3.33, -3.22, -3.17, -3.14, -3.13, -3.12],
    [-3.00, -2.93, -2.89, -2.88, -2.87, -2.86],
    [-2.63, -2.60, -2.58, -2.57, -2.57, -2.57],
    [-0.37, -0.40, -0.42, -0.42, -0.43, -0.44],
    [0.00, -0.03, -0.05, -0.06, -0.07, -0.07],
    [0.34, 0.29, 0.26, 0.24, 0.24, 0.23],
    [0.72, 0.66, 0.63, 0.62, 0.61, 0.60],
];

/// Upper-tail probabilities and critical values of the KPSS level statistic.
pub(crate) const KPSS_PROBABILITIES: [f64; 4] = [0.10, 0.05, 0.025, 0.01];
pub(crate) const KPSS_LEVEL: [f64; 4] = [0.347, 0.463, 0.574, 0.739];

/// Piecewise-linear interpolation through `(xs, ys)` with `xs` increasing;
/// outside the range the end values are returned.
pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.windows(2).position(|w| x >= w[0] && x <= w[1]).unwrap_or(last - 1);
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Dickey-Fuller quantiles for a regression with `n` observations.
/// Between 500 and infinity the columns are interpolated in `1/n`.
pub(crate) fn df_quantiles(n: usize) -> [f64; 8] {
    let n = n as f64;
    let mut out = [0.0; 8];
    for (row, q) in DF_CONSTANT.iter().zip(out.iter_mut()) {
        *q = if n <= 500.0 {
            interpolate(&DF_SAMPLE_SIZES[..5], &row[..5], n)
        } else {
            let t = 500.0 / n;
            row[5] + t * (row[4] - row[5])
        };
    }
    out
}
