//! Maximum a posteriori shrinkage of the extreme PLS direction.
//!
//! The posterior over directions is proportional to
//! `pi(beta) exp(K_n <beta, beta_ml>)` with `K_n = theta_n ||v_hat||`. Two
//! priors give closed-form modes:
//!
//! - von Mises–Fisher prior `(mu0, kappa0)` on the sphere: the MAP is the
//!   renormalised convex combination `(K_n beta_ml + kappa0 mu0) / ||.||`.
//! - Laplace prior `exp(-lambda ||beta||_1)` on the sphere: the MAP
//!   soft-thresholds each coordinate of `K_n beta_ml` and renormalises,
//!   zeroing covariates with no effect on the extremes of the response.

use ndarray::Array1;

use crate::epls::{Direction, FitResult, DEGENERATE_NORM_TOL};
use crate::error::{Error, Result};

/// Prior on the direction parameter.
#[derive(Debug, Clone)]
pub enum Prior {
    /// Uniform on the sphere; the MAP is the unshrunk estimator.
    None,
    /// von Mises–Fisher with location `mu0` and concentration `kappa0 >= 0`.
    Conjugate { mu0: Direction, kappa0: f64 },
    /// Laplace with concentration `lambda >= 0`.
    Sparse { lambda: f64 },
}

/// Soft-threshold operator `S_lambda(x) = sign(x)(|x| - lambda) 1{|x| > lambda}`.
pub fn soft_threshold(x: f64, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    if x.abs() > lambda {
        x.signum() * (x.abs() - lambda)
    } else {
        0.0
    }
}

/// MAP under the von Mises–Fisher prior, together with the posterior
/// concentration `kappa_n = ||K_n beta_ml + kappa0 mu0||`.
///
/// `kappa0 = 0` returns the unshrunk estimator; `kappa0 -> inf` returns `mu0`.
pub fn conjugate_map(fit: &FitResult, mu0: &Direction, kappa0: f64) -> Result<(Direction, f64)> {
    if !kappa0.is_finite() || kappa0 < 0.0 {
        return Err(Error::InvalidInput(format!(
            "prior concentration must be >= 0, got {kappa0}"
        )));
    }
    if mu0.dim() != fit.beta.dim() {
        return Err(Error::InvalidInput(format!(
            "mu0 has dimension {}, fit has dimension {}",
            mu0.dim(),
            fit.beta.dim()
        )));
    }
    let combined: Array1<f64> = fit.k_n * fit.beta.coords() + kappa0 * mu0.coords();
    let kappa_n = combined.dot(&combined).sqrt();
    if kappa_n < DEGENERATE_NORM_TOL {
        return Err(Error::DegenerateDirection(
            "prior and likelihood directions cancel exactly".into(),
        ));
    }
    Ok((Direction::new(combined / kappa_n)?, kappa_n))
}

/// MAP under the Laplace prior: componentwise soft threshold of
/// `K_n beta_ml`, then renormalisation.
pub fn sparse_map(fit: &FitResult, lambda: f64) -> Result<Direction> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!(
            "prior concentration must be >= 0, got {lambda}"
        )));
    }
    let shrunk: Array1<f64> = fit
        .beta
        .coords()
        .mapv(|b| soft_threshold(fit.k_n * b, lambda));
    let norm = shrunk.dot(&shrunk).sqrt();
    if norm < DEGENERATE_NORM_TOL {
        return Err(Error::OverShrunk(format!(
            "lambda={lambda} >= K_n * max|beta_ml_j| = {}; every coordinate is zero",
            fit.k_n * fit.beta.coords().iter().fold(0.0f64, |m, b| m.max(b.abs()))
        )));
    }
    Direction::new(shrunk / norm)
}

/// Unnormalised log-posterior `K_n <beta, beta_ml> + log pi(beta)` up to an
/// additive constant free of `beta`.
pub fn log_posterior(beta: &Direction, fit: &FitResult, prior: &Prior) -> f64 {
    let likelihood = fit.k_n * beta.dot(&fit.beta);
    match prior {
        Prior::None => likelihood,
        Prior::Conjugate { mu0, kappa0 } => likelihood + kappa0 * mu0.dot(beta),
        Prior::Sparse { lambda } => {
            likelihood - lambda * beta.coords().iter().map(|b| b.abs()).sum::<f64>()
        }
    }
}
