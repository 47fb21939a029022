//! Argument structures shared between the command line and `--config` JSON
//! files. Every field is optional at parse time; flags given on the command
//! line take precedence over config values, which take precedence over the
//! built-in defaults.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::errors::{CliError, CliResult};
use sepals::SimConfig;

/// Merges `cli.or(file)` for every optional field.
macro_rules! merge_fields {
    ($cli:expr, $file:expr; $($field:ident),* $(,)?) => {{
        let mut merged = $cli;
        $( merged.$field = merged.$field.or($file.$field); )*
        merged
    }};
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorArg {
    None,
    Conjugate,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Conjugate,
    Sparse,
}

/// Generative-model flags shared by `simulate` and `sweep`.
#[derive(Args, Deserialize, Debug, Default, Clone)]
pub struct SimParams {
    /// Sample size [default: 500]
    #[arg(long)]
    #[serde(default)]
    pub n: Option<usize>,
    /// Covariate dimension [default: 30]
    #[arg(long)]
    #[serde(default)]
    pub p: Option<usize>,
    /// Tail index of the Pareto response, in (0,1) [default: 0.2]
    #[arg(long)]
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Pareto scale [default: 2]
    #[arg(long)]
    #[serde(default)]
    pub scale: Option<f64>,
    /// Link exponent of g(t) = t^c [default: 1]
    #[arg(long)]
    #[serde(default)]
    pub c: Option<f64>,
    /// Clayton copula parameter (0 = independent errors) [default: 0]
    #[arg(long)]
    #[serde(default)]
    pub theta: Option<f64>,
    /// Use the rotated copula (negative Kendall tau)
    #[arg(long)]
    #[serde(default)]
    pub rotated: bool,
    /// Signal-to-noise ratio [default: 10]
    #[arg(long)]
    #[serde(default)]
    pub snr: Option<f64>,
    /// Seed of the counter-based random streams [default: 1]
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SimParams {
    pub fn merge(self, file: SimParams) -> SimParams {
        let mut merged = merge_fields!(self, file; n, p, gamma, scale, c, theta, snr, seed);
        merged.rotated = merged.rotated || file.rotated;
        merged
    }

    pub fn resolve(&self) -> CliResult<SimConfig> {
        let p = self.p.unwrap_or(30);
        let mut config = SimConfig::new(self.n.unwrap_or(500), p)?;
        config.gamma_y = self.gamma.unwrap_or(0.2);
        config.scale = self.scale.unwrap_or(2.0);
        config.link_exponent = self.c.unwrap_or(1.0);
        config.theta = self.theta.unwrap_or(0.0);
        config.rotated = self.rotated;
        config.snr = self.snr.unwrap_or(10.0);
        config.seed = self.seed.unwrap_or(1);
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self, config: &SimConfig) -> serde_json::Value {
        serde_json::json!({
            "n": config.n,
            "p": config.p,
            "gamma": config.gamma_y,
            "scale": config.scale,
            "c": config.link_exponent,
            "theta": config.theta,
            "rotated": config.rotated,
            "snr": config.snr,
        })
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimParams,
    /// Output CSV path; `<out>.manifest.json` is written alongside
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn merge(self, file: SimulateArgs) -> SimulateArgs {
        SimulateArgs {
            sim: self.sim.merge(file.sim),
            out: self.out.or(file.out),
            config: None,
        }
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
pub struct FitArgs {
    /// Input dataset CSV
    #[arg(long)]
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Number of exceedances (mutually exclusive with --threshold)
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    /// Response threshold (mutually exclusive with --k)
    #[arg(long)]
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Prior family [default: none]
    #[arg(long, value_enum)]
    #[serde(default)]
    pub prior: Option<PriorArg>,
    /// Prior concentration for the conjugate family [default: 0]
    #[arg(long)]
    #[serde(default)]
    pub kappa0: Option<f64>,
    /// Prior location for the conjugate family: comma-separated p reals
    #[arg(long)]
    #[serde(default)]
    pub mu0: Option<String>,
    /// Penalty for the sparse family [default: 0]
    #[arg(long)]
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Likelihood scale theta_n [default: 1]
    #[arg(long = "theta-n")]
    #[serde(default)]
    pub theta_n: Option<f64>,
    /// Divide each covariate column by its sample standard deviation
    #[arg(long)]
    #[serde(default)]
    pub standardize: bool,
    /// Name of the response column [default: y]
    #[arg(long = "y-col")]
    #[serde(default)]
    pub y_col: Option<String>,
    /// Output JSON path (stdout when omitted)
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl FitArgs {
    pub fn merge(self, file: FitArgs) -> FitArgs {
        let mut merged = merge_fields!(self, file;
            data, k, threshold, prior, kappa0, mu0, lambda, theta_n, y_col, out);
        merged.standardize = merged.standardize || file.standardize;
        merged.config = None;
        merged
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
pub struct SweepArgs {
    /// Shrinkage family to sweep
    #[arg(long, value_enum)]
    #[serde(default)]
    pub family: Option<FamilyArg>,
    /// Comma-separated prior concentrations (kappa0 or lambda values)
    #[arg(long = "hyper-grid")]
    #[serde(default)]
    pub hyper_grid: Option<String>,
    /// Prior location for the conjugate family: comma-separated p reals
    #[arg(long)]
    #[serde(default)]
    pub mu0: Option<String>,
    /// Smallest number of exceedances [default: 1]
    #[arg(long = "k-min")]
    #[serde(default)]
    pub k_min: Option<usize>,
    /// Largest number of exceedances [default: 100]
    #[arg(long = "k-max")]
    #[serde(default)]
    pub k_max: Option<usize>,
    /// Number of Monte Carlo replications [default: 100]
    #[arg(long)]
    #[serde(default)]
    pub reps: Option<usize>,
    /// Worker threads; the output is identical for any value [default: 1]
    #[arg(long)]
    #[serde(default)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimParams,
    /// Output CSV path
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl SweepArgs {
    pub fn merge(self, file: SweepArgs) -> SweepArgs {
        let mut merged = merge_fields!(self, file;
            family, hyper_grid, mu0, k_min, k_max, reps, jobs, out);
        merged.sim = merged.sim.merge(file.sim);
        merged.config = None;
        merged
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
pub struct TailArgs {
    /// Input dataset CSV
    #[arg(long)]
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Largest number of exceedances of the Hill plot
    #[arg(long = "k-max")]
    #[serde(default)]
    pub k_max: Option<usize>,
    /// Number of exceedances of the QQ plot
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    /// Name of the response column [default: y]
    #[arg(long = "y-col")]
    #[serde(default)]
    pub y_col: Option<String>,
    /// Directory receiving hill.csv, qq.csv and hist.csv [default: .]
    #[arg(long = "out-dir")]
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl TailArgs {
    pub fn merge(self, file: TailArgs) -> TailArgs {
        let mut merged = merge_fields!(self, file; data, k_max, k, y_col, out_dir);
        merged.config = None;
        merged
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
pub struct TailcorrArgs {
    /// Input dataset CSV
    #[arg(long)]
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Shrinkage family (only `sparse` is supported)
    #[arg(long, value_enum)]
    #[serde(default)]
    pub family: Option<FamilyArg>,
    /// Comma-separated lambda values: response-correlation mode, one row per
    /// (k, lambda)
    #[arg(long = "lambda-grid")]
    #[serde(default)]
    pub lambda_grid: Option<String>,
    /// Single lambda: per-coordinate mode, one row per (k, covariate)
    #[arg(long)]
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Exceedance grid: comma list or start:end[:step]
    #[arg(long = "k-grid")]
    #[serde(default)]
    pub k_grid: Option<String>,
    /// Likelihood scale theta_n [default: 1]
    #[arg(long = "theta-n")]
    #[serde(default)]
    pub theta_n: Option<f64>,
    /// Name of the response column [default: y]
    #[arg(long = "y-col")]
    #[serde(default)]
    pub y_col: Option<String>,
    /// Output CSV path
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl TailcorrArgs {
    pub fn merge(self, file: TailcorrArgs) -> TailcorrArgs {
        let mut merged = merge_fields!(self, file;
            data, family, lambda_grid, lambda, k_grid, theta_n, y_col, out);
        merged.config = None;
        merged
    }
}

/// Loads a `--config` JSON file into the same argument structure.
pub fn load_config<T: serde::de::DeserializeOwned>(path: &PathBuf) -> CliResult<T> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open config {}: {e}", path.display())))?;
    serde_json::from_reader(file)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

/// A required argument that may come from the flags or the config file.
pub fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required argument --{flag}")))
}
