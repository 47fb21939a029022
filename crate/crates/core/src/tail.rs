//! Heavy-tail diagnostics for the response: Hill estimator, Hill plot with a
//! normal-approximation confidence band, and quantile-quantile data for the
//! log-excesses against unit-exponential quantiles.
//!
//! With ascending order statistics `Y_{1,n} <= ... <= Y_{n,n}`, the Hill
//! estimator of the tail index is
//!
//! ```text
//! gamma_hat(k) = (1/k) sum_{i=1..k} log(Y_{n-i+1,n} / Y_{n-k,n}).
//! ```

use crate::error::{Error, Result};

/// Hill estimates over a grid of exceedance counts, with a pointwise 95%
/// band `gamma_hat(k) (1 +/- 1.96 / sqrt(k))`.
#[derive(Debug, Clone)]
pub struct HillCurve {
    pub k_values: Vec<usize>,
    pub gamma_hat: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

/// QQ-plot data: points `(log(k/i), log(Y_{n-i+1,n} / Y_{n-k,n}))` for
/// `i = 1..k`, and the least-squares slope of a line through the origin.
#[derive(Debug, Clone)]
pub struct QqData {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
}

const Z_975: f64 = 1.96;

/// Ascending sort; ties keep their relative input order.
fn sorted_ascending(responses: &[f64]) -> Result<Vec<f64>> {
    if responses.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }
    let mut sorted = responses.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(sorted)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k + 1 > n {
        return Err(Error::BadThreshold(format!(
            "k={k} outside 1..={} for n={n}",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

fn hill_from_sorted(sorted: &[f64], k: usize) -> Result<f64> {
    let n = sorted.len();
    check_k(k, n)?;
    let denom = sorted[n - k - 1];
    if denom <= 0.0 {
        return Err(Error::NonPositiveTail(format!(
            "order statistic Y_(n-k) = {denom} must be positive"
        )));
    }
    let log_denom = denom.ln();
    let sum: f64 = (1..=k).map(|i| sorted[n - i].ln() - log_denom).sum();
    Ok(sum / k as f64)
}

/// Hill estimator of the tail index using the `k` largest responses.
pub fn hill(responses: &[f64], k: usize) -> Result<f64> {
    hill_from_sorted(&sorted_ascending(responses)?, k)
}

/// Hill estimates for every `k = 1..k_max` with the 95% band.
pub fn hill_curve(responses: &[f64], k_max: usize) -> Result<HillCurve> {
    let sorted = sorted_ascending(responses)?;
    let n = sorted.len();
    if k_max < 2 || k_max + 1 > n {
        return Err(Error::BadThreshold(format!(
            "k_max={k_max} outside 2..={} for n={n}",
            n.saturating_sub(1)
        )));
    }
    if sorted[n - k_max - 1] <= 0.0 {
        return Err(Error::NonPositiveTail(format!(
            "order statistic Y_(n-k_max) = {} must be positive",
            sorted[n - k_max - 1]
        )));
    }
    // Prefix sums of the log order statistics from the top.
    let mut prefix = Vec::with_capacity(k_max + 1);
    prefix.push(0.0);
    for i in 1..=k_max {
        prefix.push(prefix[i - 1] + sorted[n - i].ln());
    }
    let mut curve = HillCurve {
        k_values: Vec::with_capacity(k_max),
        gamma_hat: Vec::with_capacity(k_max),
        ci_low: Vec::with_capacity(k_max),
        ci_high: Vec::with_capacity(k_max),
    };
    for k in 1..=k_max {
        let gamma = prefix[k] / k as f64 - sorted[n - k - 1].ln();
        let half_width = Z_975 / (k as f64).sqrt();
        curve.k_values.push(k);
        curve.gamma_hat.push(gamma);
        curve.ci_low.push(gamma * (1.0 - half_width));
        curve.ci_high.push(gamma * (1.0 + half_width));
    }
    Ok(curve)
}

/// QQ-plot data of the log-excesses above the `(k+1)`-th largest response.
pub fn qq_data(responses: &[f64], k: usize) -> Result<QqData> {
    let sorted = sorted_ascending(responses)?;
    let n = sorted.len();
    check_k(k, n)?;
    let denom = sorted[n - k - 1];
    if denom <= 0.0 {
        return Err(Error::NonPositiveTail(format!(
            "order statistic Y_(n-k) = {denom} must be positive"
        )));
    }
    let log_denom = denom.ln();
    let mut points = Vec::with_capacity(k);
    let mut sum_xy = 0.0;
    let mut sum_xx = 0.0;
    for i in 1..=k {
        let x = (k as f64 / i as f64).ln();
        let y = sorted[n - i].ln() - log_denom;
        sum_xy += x * y;
        sum_xx += x * x;
        points.push((x, y));
    }
    let slope = if sum_xx > 0.0 { sum_xy / sum_xx } else { f64::NAN };
    Ok(QqData { points, slope })
}
