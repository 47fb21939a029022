//! Browser bindings for the extreme-PLS estimators: three operations that
//! take a JSON string of parameters and return a JSON string of plot-ready
//! data. All randomness is counter-based, so the page is fully reproducible
//! from the seed in the controls.

use ndarray::Array1;
use serde::Deserialize;
use wasm_bindgen::prelude::wasm_bindgen;

use sepals::epls::{fit_epls, Direction};
use sepals::shrinkage::{conjugate_map, sparse_map};
use sepals::simulate::{simulate_dataset, SimConfig};
use sepals::tail::{hill_curve, qq_data};

#[derive(Deserialize)]
#[serde(default)]
struct DemoParams {
    n: usize,
    p: usize,
    gamma: f64,
    c: f64,
    theta: f64,
    rotated: bool,
    snr: f64,
    seed: u64,
    k: usize,
    family: String,
    hyper: f64,
    mu0: String,
    path_points: usize,
    k_max: usize,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            n: 500,
            p: 30,
            gamma: 0.2,
            c: 1.0,
            theta: 0.5,
            rotated: false,
            snr: 10.0,
            seed: 1,
            k: 50,
            family: "sparse".to_string(),
            hyper: 0.0,
            mu0: "beta".to_string(),
            path_points: 60,
            k_max: 100,
        }
    }
}

impl DemoParams {
    fn config(&self) -> Result<SimConfig, String> {
        let mut config = SimConfig::new(self.n, self.p).map_err(|e| e.to_string())?;
        config.gamma_y = self.gamma;
        config.link_exponent = self.c;
        config.theta = self.theta;
        config.rotated = self.rotated;
        config.snr = self.snr;
        config.seed = self.seed;
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    fn prior_location(&self, config: &SimConfig) -> Result<Direction, String> {
        match self.mu0.as_str() {
            // Perfect prior: the true direction.
            "beta" => Ok(config.beta.clone()),
            // Ill-adapted prior: equal weight on the first p/2 coordinates.
            "flat" => {
                let mut v = Array1::zeros(self.p);
                for j in 0..self.p / 2 {
                    v[j] = 1.0;
                }
                Direction::from_unnormalized(v).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown mu0 choice '{other}'")),
        }
    }
}

fn parse_params(json: &str) -> Result<DemoParams, String> {
    serde_json::from_str(json).map_err(|e| format!("bad parameters: {e}"))
}

fn error_json(message: String) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn squared_cosine(a: &Direction, b: &Direction) -> f64 {
    let c = a.dot(b);
    c * c
}

/// Simulates a dataset and fits the direction at the requested exceedance
/// count, with an optional shrinkage prior. Returns the true direction, the
/// unshrunk and shrunk estimates, and their similarities to the truth.
#[wasm_bindgen]
pub fn fit_snapshot(params_json: &str) -> String {
    match fit_snapshot_impl(params_json) {
        Ok(out) => out,
        Err(message) => error_json(message),
    }
}

fn fit_snapshot_impl(params_json: &str) -> Result<String, String> {
    let params = parse_params(params_json)?;
    let config = params.config()?;
    let sim = simulate_dataset(&config).map_err(|e| e.to_string())?;
    let fit = fit_epls(&sim.dataset, params.k, 1.0).map_err(|e| e.to_string())?;
    let (map, posterior_kappa) = match params.family.as_str() {
        "none" => (fit.beta.clone(), None),
        "conjugate" => {
            let mu0 = params.prior_location(&config)?;
            let (map, kappa_n) =
                conjugate_map(&fit, &mu0, params.hyper).map_err(|e| e.to_string())?;
            (map, Some(kappa_n))
        }
        "sparse" => (
            sparse_map(&fit, params.hyper).map_err(|e| e.to_string())?,
            None,
        ),
        other => return Err(format!("unknown family '{other}'")),
    };
    Ok(serde_json::json!({
        "beta_true": config.beta.as_slice().to_vec(),
        "beta_ml": fit.beta.as_slice().to_vec(),
        "beta_map": map.as_slice().to_vec(),
        "k_effective": fit.k,
        "y_threshold": fit.y_threshold,
        "v_norm": fit.v_norm,
        "k_n": fit.k_n,
        "posterior_kappa": posterior_kappa,
        "r_ml": squared_cosine(&fit.beta, &config.beta),
        "r_map": squared_cosine(&map, &config.beta),
    })
    .to_string())
}

/// Traces the MAP estimate along a grid of prior concentrations, from zero
/// (no shrinkage) up to a multiple of the likelihood weight `K_n`. Returns
/// per-coordinate trajectories plus the similarity-to-truth curve.
#[wasm_bindgen]
pub fn shrinkage_path(params_json: &str) -> String {
    match shrinkage_path_impl(params_json) {
        Ok(out) => out,
        Err(message) => error_json(message),
    }
}

fn shrinkage_path_impl(params_json: &str) -> Result<String, String> {
    let params = parse_params(params_json)?;
    let config = params.config()?;
    let sim = simulate_dataset(&config).map_err(|e| e.to_string())?;
    let fit = fit_epls(&sim.dataset, params.k, 1.0).map_err(|e| e.to_string())?;
    let points = params.path_points.clamp(2, 400);
    // The sparse MAP zeroes everything at lambda = K_n max|beta_j|; the grid
    // spans slightly past the interesting range for both families.
    let max_coord = fit
        .beta
        .coords()
        .iter()
        .fold(0.0f64, |m, b| m.max(b.abs()));
    let hyper_max = match params.family.as_str() {
        "sparse" => fit.k_n * max_coord * 0.999,
        _ => fit.k_n * 20.0,
    };
    let mu0 = params.prior_location(&config)?;
    let mut hypers = Vec::with_capacity(points);
    let mut coords = vec![Vec::with_capacity(points); config.p];
    let mut similarity = Vec::with_capacity(points);
    for i in 0..points {
        let hyper = hyper_max * i as f64 / (points - 1) as f64;
        let map = match params.family.as_str() {
            "sparse" => sparse_map(&fit, hyper),
            "conjugate" => conjugate_map(&fit, &mu0, hyper).map(|(d, _)| d),
            other => return Err(format!("unknown family '{other}'")),
        };
        let map = match map {
            Ok(direction) => direction,
            Err(_) => break,
        };
        hypers.push(hyper);
        for j in 0..config.p {
            coords[j].push(map.coords()[j]);
        }
        similarity.push(squared_cosine(&map, &config.beta));
    }
    Ok(serde_json::json!({
        "k_n": fit.k_n,
        "hypers": hypers,
        "coords": coords,
        "similarity": similarity,
        "signal_coords": 2,
    })
    .to_string())
}

/// Simulates the heavy-tailed response alone and returns Hill-plot and
/// QQ-plot data for it.
#[wasm_bindgen]
pub fn tail_diagnostics(params_json: &str) -> String {
    match tail_diagnostics_impl(params_json) {
        Ok(out) => out,
        Err(message) => error_json(message),
    }
}

fn tail_diagnostics_impl(params_json: &str) -> Result<String, String> {
    let params = parse_params(params_json)?;
    let mut config = params.config()?;
    config.p = 2; // covariates are irrelevant here, keep the draw cheap
    config.beta = SimConfig::default_beta(2).map_err(|e| e.to_string())?;
    let sim = simulate_dataset(&config).map_err(|e| e.to_string())?;
    let responses = sim.dataset.y_slice();
    let k_max = params.k_max.min(params.n.saturating_sub(1)).max(2);
    let curve = hill_curve(responses, k_max).map_err(|e| e.to_string())?;
    let k_qq = params.k.clamp(1, params.n - 1);
    let qq = qq_data(responses, k_qq).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "gamma_true": params.gamma,
        "hill_k": curve.k_values,
        "hill_gamma": curve.gamma_hat,
        "hill_lo": curve.ci_low,
        "hill_hi": curve.ci_high,
        "qq_x": qq.points.iter().map(|p| p.0).collect::<Vec<_>>(),
        "qq_y": qq.points.iter().map(|p| p.1).collect::<Vec<_>>(),
        "qq_slope": qq.slope,
        "k_qq": k_qq,
    })
    .to_string())
}
