//! Data generator for the inverse-regression model `X = g(Y) beta + eps`:
//! Pareto response, power link `g(t) = t^c`, and error margins that are
//! half-Gaussian marginally and coupled to the response through a one-factor
//! Clayton (or rotated Clayton) copula.
//!
//! Sampling is fully counter-based (see [`crate::rng`]): a dataset is a pure
//! function of its [`SimConfig`], and replication substreams are derived with
//! [`crate::rng::substream_seed`], so parallel experiment runs are
//! reproducible regardless of scheduling.

use ndarray::{Array1, Array2};

use crate::epls::{Dataset, Direction};
use crate::error::{Error, Result};
use crate::rng;

/// Full generative specification of a simulated dataset.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Sample size.
    pub n: usize,
    /// Covariate dimension.
    pub p: usize,
    /// Tail index of the Pareto response, in (0, 1).
    pub gamma_y: f64,
    /// Pareto scale (left endpoint of the support).
    pub scale: f64,
    /// Exponent of the power link `g(t) = t^c`.
    pub link_exponent: f64,
    /// Clayton dependence parameter, >= 0 (0 = independent errors).
    pub theta: f64,
    /// Use the rotated copula (negative Kendall tau).
    pub rotated: bool,
    /// Signal-to-noise ratio `g(Fbar^{-1}(1/n)) / sigma`.
    pub snr: f64,
    /// True direction.
    pub beta: Direction,
    /// Master seed of the dataset's random streams.
    pub seed: u64,
}

impl SimConfig {
    /// Standard design: `gamma_y = 0.2`, scale 2, linear link, independent
    /// errors, SNR 10 and `beta = (1,1,0,...,0)/sqrt(2)`.
    pub fn new(n: usize, p: usize) -> Result<Self> {
        Ok(Self {
            n,
            p,
            gamma_y: 0.2,
            scale: 2.0,
            link_exponent: 1.0,
            theta: 0.0,
            rotated: false,
            snr: 10.0,
            beta: Self::default_beta(p)?,
            seed: 1,
        })
    }

    /// The two-coordinate direction `(1, 1, 0, ..., 0) / sqrt(2)`.
    pub fn default_beta(p: usize) -> Result<Direction> {
        if p < 2 {
            return Err(Error::InvalidInput(format!("p must be >= 2, got {p}")));
        }
        let mut v = Array1::zeros(p);
        let s = 1.0 / 2.0_f64.sqrt();
        v[0] = s;
        v[1] = s;
        Direction::new(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 2 {
            return Err(Error::InvalidInput(format!(
                "need n >= 2 and p >= 2, got n={}, p={}",
                self.n, self.p
            )));
        }
        if !(self.gamma_y > 0.0 && self.gamma_y < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tail index must lie in (0,1), got {}",
                self.gamma_y
            )));
        }
        if !(self.scale > 0.0) || !(self.link_exponent > 0.0) || !(self.snr > 0.0) {
            return Err(Error::InvalidInput(
                "scale, link exponent and SNR must be positive".into(),
            ));
        }
        if !(self.theta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "copula parameter must be >= 0, got {}",
                self.theta
            )));
        }
        if self.beta.dim() != self.p {
            return Err(Error::InvalidInput(format!(
                "beta has dimension {}, expected p={}",
                self.beta.dim(),
                self.p
            )));
        }
        Ok(())
    }
}

/// A simulated dataset plus the latent quantities tests condition on:
/// the copula factor `v_i = F(Y_i)` and the error norms `||eps_i||_2`.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub dataset: Dataset,
    pub factor: Vec<f64>,
    pub eps_norms: Vec<f64>,
}

/// Pareto quantile `y = scale * u^{-gamma}`, the value with survival
/// probability `u`.
pub fn pareto_quantile(u: f64, gamma_y: f64, scale: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!(
            "survival probability must lie in (0, 1], got {u}"
        )));
    }
    Ok(scale * u.powf(-gamma_y))
}

/// Noise scale calibrated so `g(Fbar^{-1}(1/n)) / sigma` equals the requested
/// signal-to-noise ratio: `sigma = (scale * n^gamma)^c / snr`.
pub fn sigma_from_snr(config: &SimConfig) -> f64 {
    (config.scale * (config.n as f64).powf(config.gamma_y)).powf(config.link_exponent)
        / config.snr
}

/// Inverse of the Clayton conditional distribution `u -> dC_theta/dv (u, v)`:
///
/// ```text
/// u = ((p^{-theta/(1+theta)} - 1) v^{-theta} + 1)^{-1/theta},
/// ```
///
/// evaluated in log space so that large `theta` does not overflow. At
/// `theta = 0` the independence copula applies and `u = p_unif`.
pub fn clayton_conditional_inverse(p_unif: f64, v: f64, theta: f64) -> Result<f64> {
    if !(p_unif > 0.0 && p_unif < 1.0) || !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!(
            "conditional probability and factor must lie in (0, 1), got ({p_unif}, {v})"
        )));
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "copula parameter must be >= 0 and finite, got {theta}"
        )));
    }
    if theta == 0.0 {
        return Ok(p_unif);
    }
    // a = -theta/(1+theta) * ln p > 0, so p^{-theta/(1+theta)} - 1 = expm1(a).
    let a = -theta / (1.0 + theta) * p_unif.ln();
    let t = libm::expm1(a).ln() - theta * v.ln();
    // log(1 + e^t) without overflow on either side.
    let log_inner = if t > 36.0 {
        t + (-t).exp()
    } else {
        libm::log1p(t.exp())
    };
    Ok((-log_inner / theta).exp())
}

/// Kendall's tau of the Clayton copula, `theta / (theta + 2)`; negated for
/// the rotated copula.
pub fn kendall_tau_clayton(theta: f64, rotated: bool) -> f64 {
    debug_assert!(theta >= 0.0);
    let tau = theta / (theta + 2.0);
    if rotated {
        -tau
    } else {
        tau
    }
}

/// Standard Gaussian CDF via the complementary error function.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard Gaussian quantile: rational initial guess refined by one Newton
/// step against the erfc-based CDF; absolute accuracy well below 1e-9.
pub fn gaussian_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie in (0, 1), got {u}"
        )));
    }
    let x = acklam_initial(u);
    // Newton: x <- x - (Phi(x) - u) / phi(x)
    let err = gaussian_cdf(x) - u;
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    Ok(x - err / density)
}

/// Peter Acklam's rational approximation of the Gaussian quantile
/// (relative error below 1.15e-9 on its own).
fn acklam_initial(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const U_LOW: f64 = 0.02425;

    if u < U_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - U_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * libm::log1p(-u)).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Draws one dataset from the model `X_i = g(Y_i) beta + eps_i`.
///
/// Per observation `i`: `Y_i` is Pareto via its survival uniform `U_i`, the
/// copula factor is `v_i = F(Y_i) = 1 - U_i`, and each error margin is
/// `eps_ij = sigma * Psi^{-1}((W_ij + 1)/2)` where `W_ij` is drawn from the
/// Clayton conditional given `v_i` (rotated first via `w -> 1 - w` when
/// requested), making `2 Psi(eps/sigma) - 1` uniform and coupled to `Y`.
pub fn simulate_dataset(config: &SimConfig) -> Result<SimulatedData> {
    config.validate()?;
    let sigma = sigma_from_snr(config);
    let (n, p) = (config.n, config.p);
    let beta = config.beta.coords();
    let mut x = Array2::zeros((n, p));
    let mut y = Array1::zeros(n);
    let mut factor = vec![0.0; n];
    let mut eps_norms = vec![0.0; n];
    for i in 0..n {
        let u = rng::uniform(config.seed, &[rng::STREAM_RESPONSE, i as u64]);
        let y_i = pareto_quantile(u, config.gamma_y, config.scale)?;
        let v = 1.0 - u;
        let signal = y_i.powf(config.link_exponent);
        let mut sq_norm = 0.0;
        for j in 0..p {
            let p_unif = rng::uniform(config.seed, &[rng::STREAM_NOISE, i as u64, j as u64]);
            let mut w = clayton_conditional_inverse(p_unif, v, config.theta)?;
            if config.rotated {
                w = 1.0 - w;
            }
            let eps = sigma * gaussian_quantile((w + 1.0) / 2.0)?;
            x[[i, j]] = signal * beta[j] + eps;
            sq_norm += eps * eps;
        }
        y[i] = y_i;
        factor[i] = v;
        eps_norms[i] = sq_norm.sqrt();
    }
    Ok(SimulatedData {
        dataset: Dataset::new(x, y)?,
        factor,
        eps_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epls::fit_epls;

    #[test]
    fn pareto_quantile_examples() {
        assert_eq!(pareto_quantile(1.0, 0.2, 2.0).unwrap(), 2.0);
        let y = pareto_quantile(1.0 / 500.0, 0.2, 2.0).unwrap();
        assert!((y - 6.9314484315514639).abs() < 1e-12);
        let median = pareto_quantile(0.5, 0.2, 2.0).unwrap();
        assert!((median - 2.2973967099940700).abs() < 1e-12);
        assert!(pareto_quantile(0.0, 0.2, 2.0).is_err());
    }

    #[test]
    fn sigma_examples() {
        let mut config = SimConfig::new(500, 30).unwrap();
        assert!((sigma_from_snr(&config) - 0.69314484315514639).abs() < 1e-12);
        config.link_exponent = 0.5;
        assert!((sigma_from_snr(&config) - 0.26327644086684748).abs() < 1e-12);
        config.link_exponent = 1.0;
        config.snr = 1e12;
        assert!(sigma_from_snr(&config) < 1e-11);
    }

    /// Forward conditional `dC_theta/dv (u, v)` evaluated in log space; the
    /// independent check that the inverse round-trips.
    fn clayton_conditional_forward(u: f64, v: f64, theta: f64) -> f64 {
        let alpha = -theta * u.ln();
        let beta = -theta * v.ln();
        let m = alpha.max(beta);
        let log_inner = m + ((alpha - m).exp() + (beta - m).exp() - (-m).exp()).ln();
        ((-theta - 1.0) * v.ln() - (1.0 + 1.0 / theta) * log_inner).exp()
    }

    #[test]
    fn clayton_inverse_round_trips() {
        let mut worst = 0.0f64;
        for t in 0..10_000u64 {
            let p = rng::uniform(5, &[1, t]);
            let v = rng::uniform(5, &[2, t]);
            // theta log-uniform in [0.1, 20]
            let theta = 0.1 * (200.0f64).powf(rng::uniform(5, &[3, t]));
            let u = clayton_conditional_inverse(p, v, theta).unwrap();
            let back = clayton_conditional_forward(u, v, theta);
            worst = worst.max((back - p).abs());
        }
        assert!(worst < 1e-10, "worst round-trip error {worst}");
    }

    #[test]
    fn clayton_independence_limit() {
        for &p in &[0.17, 0.5, 0.93] {
            let u = clayton_conditional_inverse(p, 0.4, 1e-8).unwrap();
            assert!((u - p).abs() < 1e-4);
        }
        assert_eq!(clayton_conditional_inverse(0.3, 0.7, 0.0).unwrap(), 0.3);
    }

    #[test]
    fn clayton_comonotone_limit() {
        let u = clayton_conditional_inverse(0.5, 0.3, 1e3).unwrap();
        assert!((u - 0.3).abs() < 0.01, "u = {u}");
    }

    #[test]
    fn clayton_rejects_boundaries() {
        assert!(clayton_conditional_inverse(0.0, 0.5, 1.0).is_err());
        assert!(clayton_conditional_inverse(0.5, 1.0, 1.0).is_err());
        assert!(clayton_conditional_inverse(0.5, 0.5, -1.0).is_err());
    }

    #[test]
    fn kendall_tau_examples() {
        assert!((kendall_tau_clayton(8.0, false) - 0.8).abs() < 1e-15);
        assert!((kendall_tau_clayton(0.5, false) - 0.2).abs() < 1e-15);
        assert_eq!(kendall_tau_clayton(0.0, false), 0.0);
        assert!((kendall_tau_clayton(8.0, true) + 0.8).abs() < 1e-15);
    }

    #[test]
    fn gaussian_quantile_examples() {
        assert_eq!(gaussian_quantile(0.5).unwrap(), 0.0);
        assert!((gaussian_quantile(0.975).unwrap() - 1.9599639845400542).abs() < 1e-9);
        assert!(gaussian_quantile(0.0).is_err());
        assert!(gaussian_quantile(1.0).is_err());
    }

    #[test]
    fn gaussian_quantile_round_trip() {
        for t in 0..10_000u64 {
            let u = (t as f64 + 0.5) / 10_000.0;
            let x = gaussian_quantile(u).unwrap();
            assert!((gaussian_cdf(x) - u).abs() < 1e-9, "u={u}");
        }
    }

    #[test]
    fn gaussian_quantile_against_bisection_oracle() {
        // Bisection on the erfc-based CDF, independent of the rational
        // approximation path.
        for &u in &[0.001, 0.025, 0.31, 0.5, 0.87, 0.975, 0.9999] {
            let (mut lo, mut hi) = (-10.0f64, 10.0f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if gaussian_cdf(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = 0.5 * (lo + hi);
            assert!(
                (gaussian_quantile(u).unwrap() - oracle).abs() < 1e-9,
                "u={u}"
            );
        }
    }

    #[test]
    fn dataset_is_reproducible() {
        let config = SimConfig::new(50, 5).unwrap();
        let a = simulate_dataset(&config).unwrap();
        let b = simulate_dataset(&config).unwrap();
        assert_eq!(a.dataset.x(), b.dataset.x());
        assert_eq!(a.dataset.y(), b.dataset.y());
        let mut other = config.clone();
        other.seed = 2;
        let c = simulate_dataset(&other).unwrap();
        assert_ne!(a.dataset.y(), c.dataset.y());
    }

    #[test]
    fn errors_are_non_negative_and_triangle_bound_holds() {
        let mut config = SimConfig::new(200, 4).unwrap();
        config.theta = 2.0;
        config.snr = 3.0;
        let sim = simulate_dataset(&config).unwrap();
        let sigma = sigma_from_snr(&config);
        for i in 0..config.n {
            let y_i = sim.dataset.y()[i];
            let signal = y_i.powf(config.link_exponent);
            let row = sim.dataset.x().row(i);
            let row_norm = row.dot(&row).sqrt();
            assert!(row_norm <= signal.abs() + sim.eps_norms[i] + 1e-12);
            for j in 0..config.p {
                let eps = row[j] - signal * config.beta.coords()[j];
                assert!(eps >= 0.0, "eps[{i}][{j}] = {eps}");
                assert!(eps.is_finite() && eps < 20.0 * sigma);
            }
        }
    }

    #[test]
    fn noiseless_fit_recovers_direction() {
        let mut config = SimConfig::new(500, 30).unwrap();
        config.snr = 1e12;
        let sim = simulate_dataset(&config).unwrap();
        let fit = fit_epls(&sim.dataset, 50, 1.0).unwrap();
        let cos = fit.beta.dot(&config.beta);
        assert!(cos * cos >= 1.0 - 1e-6, "cos^2 = {}", cos * cos);
    }

    #[test]
    fn response_margin_is_pareto() {
        // KS distance of (Y/scale)^(-1/gamma) against uniform, n = 1e5,
        // 1% critical value 1.63 / sqrt(n).
        let mut config = SimConfig::new(100_000, 2).unwrap();
        config.p = 2;
        let sim = simulate_dataset(&config).unwrap();
        let mut u: Vec<f64> = sim
            .dataset
            .y()
            .iter()
            .map(|&y| (y / config.scale).powf(-1.0 / config.gamma_y))
            .collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = u.len() as f64;
        let mut ks = 0.0f64;
        for (i, &v) in u.iter().enumerate() {
            let lo = i as f64 / n;
            let hi = (i as f64 + 1.0) / n;
            ks = ks.max((v - lo).abs()).max((v - hi).abs());
        }
        assert!(ks < 1.63 / n.sqrt(), "KS = {ks}");
    }

    #[test]
    fn error_margin_is_half_gaussian() {
        // KS of eps/sigma against 2*Psi(x) - 1 on one coordinate, n = 1e4.
        let mut config = SimConfig::new(10_000, 2).unwrap();
        config.theta = 8.0;
        config.snr = 2.0;
        let sim = simulate_dataset(&config).unwrap();
        let sigma = sigma_from_snr(&config);
        let mut scaled: Vec<f64> = (0..config.n)
            .map(|i| {
                let y_i = sim.dataset.y()[i];
                (sim.dataset.x()[[i, 1]] - y_i.powf(config.link_exponent) * config.beta.coords()[1])
                    / sigma
            })
            .collect();
        scaled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = scaled.len() as f64;
        let mut ks = 0.0f64;
        for (i, &v) in scaled.iter().enumerate() {
            let cdf = 2.0 * gaussian_cdf(v) - 1.0;
            let lo = i as f64 / n;
            let hi = (i as f64 + 1.0) / n;
            ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        assert!(ks < 1.63 / n.sqrt(), "KS = {ks}");
    }
}
