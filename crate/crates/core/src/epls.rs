//! Extreme partial least squares: the single direction that maximises the
//! empirical covariance between a linear projection of the covariates and the
//! response, restricted to responses above a high threshold.
//!
//! For a threshold `y` the estimator is `v_hat(y) / ||v_hat(y)||` with
//!
//! ```text
//! v_hat(y) = sum_i X_i Phi_i,
//! Phi_i    = (1/n) (Fbar(y) Y_i - m_Y(y)) 1{Y_i >= y},
//! ```
//!
//! where `Fbar` is the empirical survival function and `m_Y` the truncated
//! first moment `(1/n) sum_i Y_i 1{Y_i >= y}`. The same direction is the
//! maximum likelihood estimator of the location parameter when each `X_i` is
//! modelled as von Mises–Fisher on a ball (see [`ball_loglik`]).

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::vmf::UNIT_NORM_TOL;

/// Norms below this are treated as zero: the vector carries no direction.
pub const DEGENERATE_NORM_TOL: f64 = 1e-14;

/// An `n` sample of covariates (rows of `x`) and responses.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n < 2 || p < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 observations and 2 covariates, got n={n}, p={p}"
            )));
        }
        if y.len() != n {
            return Err(Error::InvalidInput(format!(
                "X has {n} rows but Y has {} entries",
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in data".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn y_slice(&self) -> &[f64] {
        self.y.as_slice().expect("responses are contiguous")
    }
}

/// A unit vector in R^p.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Array1<f64>);

impl Direction {
    /// Wraps a vector that is already unit norm (within 1e-12).
    pub fn new(coords: Array1<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "direction must have dimension >= 2, got {}",
                coords.len()
            )));
        }
        let norm = coords.dot(&coords).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "direction must have unit norm, got {norm}"
            )));
        }
        Ok(Self(coords))
    }

    /// Normalises an arbitrary vector; fails if its norm is numerically zero.
    pub fn from_unnormalized(v: Array1<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "direction must have dimension >= 2, got {}",
                v.len()
            )));
        }
        let norm = v.dot(&v).sqrt();
        if !norm.is_finite() || norm < DEGENERATE_NORM_TOL {
            return Err(Error::DegenerateDirection(format!(
                "vector norm {norm} is numerically zero"
            )));
        }
        Ok(Self(v / norm))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("direction is contiguous")
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.dot(&other.0)
    }

    /// Flips the sign of every coordinate.
    pub fn negated(&self) -> Direction {
        Direction(-&self.0)
    }
}

/// A fitted direction with its threshold and scale metadata.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Estimated unit direction.
    pub beta: Direction,
    /// Threshold `y_n` actually used (the k-th largest response).
    pub y_threshold: f64,
    /// Effective number of exceedances `#{i : Y_i >= y_n}` (>= requested k
    /// under ties).
    pub k: usize,
    /// `||v_hat(y_n)||_2`.
    pub v_norm: f64,
    /// `theta_n * ||v_hat(y_n)||_2`, the likelihood weight of the posterior.
    pub k_n: f64,
}

/// Empirical survival function `(1/n) #{i : Y_i >= y}` (inclusive).
pub fn empirical_survival(y: f64, responses: &[f64]) -> f64 {
    assert!(!responses.is_empty(), "responses must be non-empty");
    responses.iter().filter(|&&v| v >= y).count() as f64 / responses.len() as f64
}

/// Truncated first moment `(1/n) sum_i Y_i 1{Y_i >= y}`.
pub fn truncated_mean(y: f64, responses: &[f64]) -> f64 {
    assert!(!responses.is_empty(), "responses must be non-empty");
    responses.iter().filter(|&&v| v >= y).sum::<f64>() / responses.len() as f64
}

/// Exceedance weights `Phi_i = (1/n)(Fbar(y) Y_i - m_Y(y)) 1{Y_i >= y}`.
///
/// Entries for non-exceedances are exactly zero. The bracket is evaluated as
/// `(count * Y_i - sum) / n^2` so that a single exceedance cancels exactly in
/// floating point rather than leaving rounding residue.
pub fn phi_weights(y: f64, responses: &[f64]) -> Vec<f64> {
    assert!(!responses.is_empty(), "responses must be non-empty");
    let n = responses.len() as f64;
    let exceed = responses.iter().filter(|&&v| v >= y);
    let count = exceed.clone().count() as f64;
    let sum: f64 = exceed.sum();
    responses
        .iter()
        .map(|&v| {
            if v >= y {
                (count * v - sum) / (n * n)
            } else {
                0.0
            }
        })
        .collect()
}

/// The unnormalised direction `v_hat(y) = sum_i X_i Phi_i`.
pub fn v_hat(y: f64, data: &Dataset) -> Array1<f64> {
    let phi = Array1::from(phi_weights(y, data.y_slice()));
    data.x().t().dot(&phi)
}

/// Fits the direction using the `k` largest responses.
///
/// The threshold is the k-th largest response; under ties the effective
/// exceedance count may exceed `k` and is reported in [`FitResult::k`].
pub fn fit_epls(data: &Dataset, k: usize, theta_n: f64) -> Result<FitResult> {
    let n = data.n();
    if k < 1 || k > n {
        return Err(Error::BadThreshold(format!(
            "exceedance count k={k} outside 1..={n}"
        )));
    }
    let mut sorted = data.y_slice().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("responses are finite"));
    fit_epls_at_threshold(data, sorted[k - 1], theta_n)
}

/// Fits the direction using all responses at or above the threshold `y`.
pub fn fit_epls_at_threshold(data: &Dataset, y: f64, theta_n: f64) -> Result<FitResult> {
    if !theta_n.is_finite() || theta_n <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "scale theta_n must be > 0, got {theta_n}"
        )));
    }
    let k_effective = data.y_slice().iter().filter(|&&v| v >= y).count();
    let v = v_hat(y, data);
    let v_norm = v.dot(&v).sqrt();
    if v_norm < DEGENERATE_NORM_TOL {
        return Err(Error::DegenerateDirection(format!(
            "v_hat has norm {v_norm} at threshold {y} ({k_effective} exceedances); \
             a single exceedance or all-equal exceedance responses give exactly zero weights"
        )));
    }
    Ok(FitResult {
        beta: Direction(v / v_norm),
        y_threshold: y,
        k: k_effective,
        v_norm,
        k_n: theta_n * v_norm,
    })
}

/// Profile log-likelihood of a candidate direction under the
/// von Mises–Fisher-on-a-ball model, up to an additive constant free of the
/// direction.
///
/// The observation radii `r_i = |g(Y_i)| + ||eps_i||` and per-observation
/// concentrations only enter that constant, which is dropped; what remains is
/// `theta_n <beta, v_hat(y)>`. `eps_norms` documents the conditioning
/// variables of the model and is validated for shape only.
pub fn ball_loglik(
    beta: &Direction,
    data: &Dataset,
    y: f64,
    theta_n: f64,
    eps_norms: &[f64],
) -> Result<f64> {
    if beta.dim() != data.p() {
        return Err(Error::InvalidInput(format!(
            "direction dimension {} does not match p={}",
            beta.dim(),
            data.p()
        )));
    }
    if eps_norms.len() != data.n() {
        return Err(Error::InvalidInput(format!(
            "eps_norms has length {}, expected n={}",
            eps_norms.len(),
            data.n()
        )));
    }
    if eps_norms.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidInput(
            "eps_norms must be non-negative and finite".into(),
        ));
    }
    if !theta_n.is_finite() || theta_n <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "scale theta_n must be > 0, got {theta_n}"
        )));
    }
    Ok(theta_n * beta.coords().dot(&v_hat(y, data)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2};

    fn toy_dataset() -> Dataset {
        // Rows chosen so the weighted sum isolates rows 2 and 3.
        let x = arr2(&[[7.0, 7.0], [1.0, 0.0], [0.0, 1.0]]);
        let y = arr1(&[1.0, 3.0, 5.0]);
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn survival_examples() {
        let y = [1.0, 3.0, 5.0];
        assert_eq!(empirical_survival(1.0, &y), 1.0);
        assert_eq!(empirical_survival(6.0, &y), 0.0);
        assert!((empirical_survival(2.0, &y) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_mean_examples() {
        let y = [1.0, 3.0, 5.0];
        assert!((truncated_mean(2.0, &y) - 8.0 / 3.0).abs() < 1e-15);
        assert!((truncated_mean(0.0, &y) - 3.0).abs() < 1e-15);
        assert_eq!(truncated_mean(6.0, &y), 0.0);
    }

    #[test]
    fn phi_weight_examples() {
        let y = [1.0, 3.0, 5.0];
        let phi = phi_weights(2.0, &y);
        assert_eq!(phi[0], 0.0);
        assert!((phi[1] + 2.0 / 9.0).abs() < 1e-15);
        assert!((phi[2] - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn single_exceedance_weight_is_exactly_zero() {
        let y = [1.0, 3.0, 5.0];
        let phi = phi_weights(4.5, &y);
        assert_eq!(phi, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn full_sample_weights_sum_to_zero() {
        let y = [2.0, 7.0, 3.5, 9.25, 4.0];
        let total: f64 = phi_weights(1.0, &y).iter().sum();
        assert!(total.abs() < 1e-15);
    }

    #[test]
    fn v_hat_example() {
        let data = toy_dataset();
        let v = v_hat(2.0, &data);
        assert!((v[0] + 2.0 / 9.0).abs() < 1e-15);
        assert!((v[1] - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn v_hat_vanishes_without_exceedances() {
        let data = toy_dataset();
        let v = v_hat(100.0, &data);
        assert_eq!(v, arr1(&[0.0, 0.0]));
    }

    #[test]
    fn fit_example() {
        let data = toy_dataset();
        let fit = fit_epls(&data, 2, 1.0).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((fit.beta.coords()[0] + s).abs() < 1e-12);
        assert!((fit.beta.coords()[1] - s).abs() < 1e-12);
        assert!((fit.v_norm - 2.0 * 2.0_f64.sqrt() / 9.0).abs() < 1e-15);
        assert_eq!(fit.k, 2);
        assert_eq!(fit.y_threshold, 3.0);
        assert_eq!(fit.k_n, fit.v_norm);
    }

    #[test]
    fn fit_k1_degenerates() {
        let data = toy_dataset();
        match fit_epls(&data, 1, 1.0) {
            Err(Error::DegenerateDirection(_)) => {}
            other => panic!("expected DegenerateDirection, got {other:?}"),
        }
    }

    #[test]
    fn fit_equal_exceedances_degenerates() {
        let x = arr2(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let y = arr1(&[1.0, 4.0, 4.0]);
        let data = Dataset::new(x, y).unwrap();
        assert!(matches!(
            fit_epls(&data, 2, 1.0),
            Err(Error::DegenerateDirection(_))
        ));
    }

    #[test]
    fn fit_k_out_of_range() {
        let data = toy_dataset();
        assert!(matches!(fit_epls(&data, 0, 1.0), Err(Error::BadThreshold(_))));
        assert!(matches!(fit_epls(&data, 4, 1.0), Err(Error::BadThreshold(_))));
    }

    #[test]
    fn fit_ties_report_effective_count() {
        let x = arr2(&[[1.0, 0.0], [0.0, 1.0], [2.0, 1.0], [1.0, 3.0]]);
        let y = arr1(&[1.0, 4.0, 4.0, 9.0]);
        let data = Dataset::new(x, y).unwrap();
        let fit = fit_epls(&data, 2, 1.0).unwrap();
        // Threshold is the 2nd largest (4.0); both tied observations count.
        assert_eq!(fit.y_threshold, 4.0);
        assert_eq!(fit.k, 3);
    }

    #[test]
    fn full_sample_v_hat_is_shift_invariant() {
        // With k = n the weights sum to zero, so adding the same vector to
        // every row leaves v_hat unchanged.
        let data = toy_dataset();
        let mut shifted = data.x().clone();
        for mut row in shifted.rows_mut() {
            row[0] += 11.0;
            row[1] -= 4.5;
        }
        let shifted = Dataset::new(shifted, data.y().clone()).unwrap();
        let y_min = 0.5;
        let a = v_hat(y_min, &data);
        let b = v_hat(y_min, &shifted);
        for j in 0..2 {
            assert!((a[j] - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_scale_equivariance() {
        let data = toy_dataset();
        let scaled = Dataset::new(data.x() * 3.5, data.y().clone()).unwrap();
        let a = fit_epls(&data, 2, 1.0).unwrap();
        let b = fit_epls(&scaled, 2, 1.0).unwrap();
        for j in 0..2 {
            assert!((a.beta.coords()[j] - b.beta.coords()[j]).abs() < 1e-12);
        }
        assert!((b.v_norm - 3.5 * a.v_norm).abs() < 1e-12);
    }

    #[test]
    fn sign_coherence() {
        let data = toy_dataset();
        let fit = fit_epls(&data, 2, 1.0).unwrap();
        let v = v_hat(fit.y_threshold, &data);
        for j in 0..2 {
            assert!((v[j] - fit.v_norm * fit.beta.coords()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn loglik_extremes_at_fitted_direction() {
        let data = toy_dataset();
        let theta_n = 2.25;
        let fit = fit_epls(&data, 2, theta_n).unwrap();
        let eps = vec![0.0; 3];
        let at_max = ball_loglik(&fit.beta, &data, fit.y_threshold, theta_n, &eps).unwrap();
        assert!((at_max - fit.k_n).abs() < 1e-14);
        let at_min =
            ball_loglik(&fit.beta.negated(), &data, fit.y_threshold, theta_n, &eps).unwrap();
        assert!((at_min + fit.k_n).abs() < 1e-14);
    }

    #[test]
    fn loglik_validates_shapes() {
        let data = toy_dataset();
        let fit = fit_epls(&data, 2, 1.0).unwrap();
        assert!(ball_loglik(&fit.beta, &data, 3.0, 1.0, &[0.0; 2]).is_err());
        assert!(ball_loglik(&fit.beta, &data, 3.0, 0.0, &[0.0; 3]).is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(arr2(&[[1.0, 2.0]]), arr1(&[1.0])).is_err());
        assert!(Dataset::new(
            arr2(&[[1.0, 2.0], [3.0, f64::NAN]]),
            arr1(&[1.0, 2.0])
        )
        .is_err());
        assert!(Dataset::new(arr2(&[[1.0, 2.0], [3.0, 4.0]]), arr1(&[1.0])).is_err());
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(arr1(&[0.6, 0.8])).is_ok());
        assert!(Direction::new(arr1(&[0.6, 0.9])).is_err());
        assert!(Direction::from_unnormalized(arr1(&[0.0, 0.0])).is_err());
        let d = Direction::from_unnormalized(arr1(&[3.0, 4.0])).unwrap();
        assert!((d.coords()[0] - 0.6).abs() < 1e-15);
    }
}
