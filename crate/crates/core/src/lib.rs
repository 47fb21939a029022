//! Extreme partial least squares with shrinkage.
//!
//! Estimates the single direction `beta` along which large values of a
//! response `Y` are explained by the covariates `X`, using only the
//! observations whose response exceeds a high threshold. Two closed-form
//! maximum a posteriori variants shrink the estimate: towards a prior
//! direction (von Mises–Fisher prior) or towards sparsity (Laplace prior).
//!
//! Modules:
//!
//! - [`epls`] — the exceedance-weighted direction estimator and its
//!   likelihood interpretation;
//! - [`shrinkage`] — conjugate and sparse MAP estimators and log-posteriors;
//! - [`vmf`] — Bessel functions and von Mises–Fisher densities on the sphere
//!   and on balls;
//! - [`tail`] — Hill estimator, Hill plot bands and QQ data for log-excesses;
//! - [`simulate`] — the Pareto/Clayton one-factor data generator;
//! - [`metrics`] — similarity and conditional tail correlations, plus the
//!   Monte Carlo sweep harness;
//! - [`rng`] — the fixed counter-based uniform source behind all sampling.

pub mod epls;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod shrinkage;
pub mod simulate;
pub mod tail;
pub mod vmf;

pub use epls::{Dataset, Direction, FitResult};
pub use error::{Error, Result};
pub use shrinkage::Prior;
pub use simulate::SimConfig;
