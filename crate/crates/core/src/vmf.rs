//! Modified Bessel functions of the first kind and von Mises–Fisher
//! log-densities on the unit sphere and on centred balls.
//!
//! The sphere density is
//!
//! ```text
//! f_S(x | mu, kappa) = c_p(kappa) exp(kappa <mu, x>),   ||x||_2 = 1,
//! ```
//!
//! with normaliser `c_p(kappa) = kappa^{p/2-1} / ((2 pi)^{p/2} I_{p/2-1}(kappa))`
//! for `kappa > 0`. The ball variant rescales the sphere family to the ball of
//! radius `r`:
//!
//! ```text
//! f_B(x | mu, r, kappa) = 2 pi c_{p+2}(kappa) r^{-p} exp(kappa <mu, x> / r),
//! ||x||_2 <= r.
//! ```
//!
//! At `kappa = 0` the normaliser is taken as the `kappa -> 0+` limit
//! `Gamma(p/2) / (2 pi^{p/2})`, the inverse surface area of the sphere, so
//! `c_p` is continuous and `kappa = 0` means uniform on the support.

use crate::error::{Error, Result};

/// Vectors must have unit norm within this tolerance; renormalised
/// double-precision vectors always pass.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Membership tolerance for the sphere support check in [`logpdf_sphere`].
pub const SPHERE_SUPPORT_TOL: f64 = 1e-9;

/// Relative term size below which the Bessel power series is truncated.
const SERIES_REL_TOL: f64 = 1e-15;
/// Hard cap on the number of series terms in the direct branch.
const SERIES_MAX_TERMS: usize = 500;
/// Above this argument the series is summed in log space to avoid overflow.
const LOG_SPACE_KAPPA: f64 = 700.0;

fn check_order_arg(q: f64, kappa: f64) -> Result<()> {
    if !q.is_finite() || q < 0.0 {
        return Err(Error::Domain(format!("Bessel order must be >= 0, got {q}")));
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::Domain(format!(
            "Bessel argument must be >= 0, got {kappa}"
        )));
    }
    Ok(())
}

/// Modified Bessel function of the first kind, `I_q(kappa)`.
///
/// Power series summed with iterative term updates
/// `term_{l+1} = term_l (kappa/2)^2 / ((l+1)(q+l+1))` until a term contributes
/// less than 1e-15 of the running sum.
pub fn bessel_i(q: f64, kappa: f64) -> Result<f64> {
    check_order_arg(q, kappa)?;
    if kappa == 0.0 {
        // Only the l = 0 term survives: 0^0 = 1 for q = 0, else 0.
        return Ok(if q == 0.0 { 1.0 } else { 0.0 });
    }
    if kappa > LOG_SPACE_KAPPA {
        return Ok(log_series_large(q, kappa).exp());
    }
    let (log_prefactor, tail_sum) = series_direct(q, kappa);
    Ok(log_prefactor.exp() * tail_sum)
}

/// Natural log of `I_q(kappa)`; `-inf` for `q > 0, kappa = 0`.
///
/// Identical series as [`bessel_i`], but usable for arguments where the value
/// itself overflows `f64` (roughly `kappa > 713`).
pub fn log_bessel_i(q: f64, kappa: f64) -> Result<f64> {
    check_order_arg(q, kappa)?;
    if kappa == 0.0 {
        return Ok(if q == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if kappa > LOG_SPACE_KAPPA {
        return Ok(log_series_large(q, kappa));
    }
    let (log_prefactor, tail_sum) = series_direct(q, kappa);
    Ok(log_prefactor + tail_sum.ln())
}

/// Direct branch: returns `(log of the l = 0 term, sum of relative terms)`.
fn series_direct(q: f64, kappa: f64) -> (f64, f64) {
    let x2 = (kappa / 2.0) * (kappa / 2.0);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for l in 0..SERIES_MAX_TERMS {
        let lf = l as f64;
        term *= x2 / ((lf + 1.0) * (q + lf + 1.0));
        sum += term;
        if term < SERIES_REL_TOL * sum {
            break;
        }
    }
    (q * (kappa / 2.0).ln() - libm::lgamma(q + 1.0), sum)
}

/// Log-space branch for large arguments: log-sum-exp over the log terms
/// `a_l = (2l+q) log(kappa/2) - lgamma(q+l+1) - lgamma(l+1)`.
fn log_series_large(q: f64, kappa: f64) -> f64 {
    let lx = (kappa / 2.0).ln();
    // Terms grow up to l ~ kappa/2 before decaying.
    let max_iter = kappa as usize + 2_000;
    let mut running_max = f64::NEG_INFINITY;
    let mut scaled_sum = 0.0_f64;
    let mut prev = f64::NEG_INFINITY;
    for l in 0..max_iter {
        let lf = l as f64;
        let a = (2.0 * lf + q) * lx - libm::lgamma(q + lf + 1.0) - libm::lgamma(lf + 1.0);
        if a > running_max {
            scaled_sum = scaled_sum * (running_max - a).exp() + 1.0;
            running_max = a;
        } else {
            scaled_sum += (a - running_max).exp();
        }
        if a < prev && a < running_max - 60.0 {
            break;
        }
        prev = a;
    }
    running_max + scaled_sum.ln()
}

/// Log of the sphere normalising constant `c_p(kappa)`.
///
/// The `kappa = 0` value is the limit of the `kappa > 0` branch,
/// `Gamma(p/2) / (2 pi^{p/2})`, i.e. the inverse surface area of `S^{p-1}`.
pub fn log_c_p(p: usize, kappa: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {p}")));
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::Domain(format!(
            "concentration must be >= 0, got {kappa}"
        )));
    }
    let half_p = p as f64 / 2.0;
    if kappa == 0.0 {
        return Ok(libm::lgamma(half_p)
            - std::f64::consts::LN_2
            - half_p * std::f64::consts::PI.ln());
    }
    let q = half_p - 1.0;
    Ok(q * kappa.ln()
        - half_p * (2.0 * std::f64::consts::PI).ln()
        - log_bessel_i(q, kappa)?)
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn check_unit(mu: &[f64]) -> Result<()> {
    if mu.len() < 2 {
        return Err(Error::Domain(format!(
            "location vector must have dimension >= 2, got {}",
            mu.len()
        )));
    }
    let norm = squared_norm(mu).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::Domain(format!(
            "location vector must have unit norm, got ||mu|| = {norm}"
        )));
    }
    Ok(())
}

/// Log-density of the von Mises–Fisher distribution on the unit sphere.
///
/// Returns `-inf` when `x` is not on the sphere (tolerance 1e-9 on the norm).
pub fn logpdf_sphere(x: &[f64], mu: &[f64], kappa: f64) -> Result<f64> {
    check_unit(mu)?;
    if x.len() != mu.len() {
        return Err(Error::InvalidInput(format!(
            "x has dimension {}, mu has dimension {}",
            x.len(),
            mu.len()
        )));
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::Domain(format!(
            "concentration must be >= 0, got {kappa}"
        )));
    }
    let norm = squared_norm(x).sqrt();
    if (norm - 1.0).abs() > SPHERE_SUPPORT_TOL {
        return Ok(f64::NEG_INFINITY);
    }
    let dot: f64 = x.iter().zip(mu).map(|(a, b)| a * b).sum();
    Ok(log_c_p(mu.len(), kappa)? + kappa * dot)
}

/// Parameters of the von Mises–Fisher distribution on the ball of radius `r`:
/// unit location `mu`, radius `r > 0` and concentration `kappa >= 0`.
#[derive(Debug, Clone)]
pub struct BallVmfParams {
    mu: Vec<f64>,
    r: f64,
    kappa: f64,
}

impl BallVmfParams {
    pub fn new(mu: Vec<f64>, r: f64, kappa: f64) -> Result<Self> {
        check_unit(&mu)?;
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::Domain(format!("radius must be > 0, got {r}")));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::Domain(format!(
                "concentration must be >= 0, got {kappa}"
            )));
        }
        Ok(Self { mu, r, kappa })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Log-density of the von Mises–Fisher distribution on the ball.
///
/// `log(2 pi) + log c_{p+2}(kappa) - p log r + kappa <mu, x> / r` inside the
/// ball, `-inf` outside.
pub fn logpdf_ball(x: &[f64], params: &BallVmfParams) -> Result<f64> {
    let p = params.dim();
    if x.len() != p {
        return Err(Error::InvalidInput(format!(
            "x has dimension {}, params have dimension {p}",
            x.len()
        )));
    }
    if squared_norm(x).sqrt() > params.r {
        return Ok(f64::NEG_INFINITY);
    }
    let dot: f64 = x.iter().zip(&params.mu).map(|(a, b)| a * b).sum();
    Ok((2.0 * std::f64::consts::PI).ln() + log_c_p(p + 2, params.kappa)?
        - p as f64 * params.r.ln()
        + params.kappa * dot / params.r)
}
