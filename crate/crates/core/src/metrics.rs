//! Performance and interpretation metrics: the replication-averaged squared
//! inner product with the true direction, conditional tail correlations over
//! the exceedance subsample, rank correlation, and the Monte Carlo sweep
//! harness that drives both shrinkage families over `(hyperparameter, k)`
//! grids.

use crate::epls::{fit_epls, Dataset, Direction};
use crate::error::{Error, Result};
use crate::rng;
use crate::shrinkage::{conjugate_map, sparse_map};
use crate::simulate::{simulate_dataset, SimConfig};

/// Similarity between a set of estimated directions and the true one:
/// the mean of `<beta_hat, beta>^2`, in [0, 1] and sign-free.
pub fn similarity_r(estimates: &[Direction], beta_true: &Direction) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::InvalidInput("no estimates given".into()));
    }
    let total: f64 = estimates
        .iter()
        .map(|b| {
            let c = b.dot(beta_true);
            c * c
        })
        .sum();
    Ok(total / estimates.len() as f64)
}

/// Pearson correlation of two equal-length samples; `None` when either sample
/// has zero sum of squared deviations.
fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut ssa = 0.0;
    let mut ssb = 0.0;
    let mut sab = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        ssa += da * da;
        ssb += db * db;
        sab += da * db;
    }
    let denom = (ssa * ssb).sqrt();
    if denom == 0.0 {
        None
    } else {
        Some((sab / denom).clamp(-1.0, 1.0))
    }
}

fn exceedance_indices(data: &Dataset, y: f64) -> Vec<usize> {
    (0..data.n()).filter(|&i| data.y()[i] >= y).collect()
}

/// Correlation between the projection `<X, beta>` and `Y` over the
/// exceedance subsample `{i : Y_i >= y}`.
pub fn tail_corr_y(data: &Dataset, beta: &Direction, y: f64) -> Result<f64> {
    if beta.dim() != data.p() {
        return Err(Error::InvalidInput(format!(
            "direction dimension {} does not match p={}",
            beta.dim(),
            data.p()
        )));
    }
    let idx = exceedance_indices(data, y);
    if idx.len() < 3 {
        return Err(Error::DegenerateSubsample(format!(
            "only {} exceedances at threshold {y}",
            idx.len()
        )));
    }
    let proj: Vec<f64> = idx
        .iter()
        .map(|&i| data.x().row(i).dot(beta.coords()))
        .collect();
    let resp: Vec<f64> = idx.iter().map(|&i| data.y()[i]).collect();
    pearson(&proj, &resp).ok_or_else(|| {
        Error::DegenerateSubsample(format!(
            "zero variance in the exceedance subsample at threshold {y}"
        ))
    })
}

/// Correlation between the projection `<X, beta>` and the 0-based covariate
/// `X^{(j)}` over the exceedance subsample.
pub fn tail_corr_x(data: &Dataset, beta: &Direction, y: f64, j: usize) -> Result<f64> {
    if beta.dim() != data.p() {
        return Err(Error::InvalidInput(format!(
            "direction dimension {} does not match p={}",
            beta.dim(),
            data.p()
        )));
    }
    if j >= data.p() {
        return Err(Error::InvalidInput(format!(
            "coordinate {j} out of range for p={}",
            data.p()
        )));
    }
    let idx = exceedance_indices(data, y);
    if idx.len() < 3 {
        return Err(Error::DegenerateSubsample(format!(
            "only {} exceedances at threshold {y}",
            idx.len()
        )));
    }
    let proj: Vec<f64> = idx
        .iter()
        .map(|&i| data.x().row(i).dot(beta.coords()))
        .collect();
    let coord: Vec<f64> = idx.iter().map(|&i| data.x()[[i, j]]).collect();
    pearson(&proj, &coord).ok_or_else(|| {
        Error::DegenerateSubsample(format!(
            "zero variance in the exceedance subsample at threshold {y}"
        ))
    })
}

/// Kendall's tau-b of two samples in O(n log n) via merge-sort inversion
/// counting, with tie corrections.
pub fn empirical_kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "samples have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least 2 pairs".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value".into()));
    }
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap()
            .then(x.1.partial_cmp(&y.1).unwrap())
    });

    let tie_pairs = |mut values: Vec<f64>| -> u64 {
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut total = 0u64;
        let mut run = 1u64;
        for w in values.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };

    // Ties in a, in b, and jointly (pairs is sorted by (a, b)).
    let t_a = tie_pairs(pairs.iter().map(|p| p.0).collect());
    let t_b = tie_pairs(pairs.iter().map(|p| p.1).collect());
    let mut t_ab = 0u64;
    let mut run = 1u64;
    for w in pairs.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            t_ab += run * (run - 1) / 2;
            run = 1;
        }
    }
    t_ab += run * (run - 1) / 2;

    // Discordant pairs = inversions of the b sequence once sorted by a,
    // counting only strict descents.
    let mut seq: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = count_inversions(&mut seq, &mut buf);

    let n0 = n as u64 * (n as u64 - 1) / 2;
    let concordant_minus_discordant =
        n0 as i64 - t_a as i64 - t_b as i64 + t_ab as i64 - 2 * discordant as i64;
    let denom = ((n0 - t_a) as f64 * (n0 - t_b) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateSubsample(
            "a sample is constant; tau undefined".into(),
        ));
    }
    Ok(concordant_minus_discordant as f64 / denom)
}

/// Merge-sort inversion count (strict inversions only).
fn count_inversions(seq: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = seq.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = seq.split_at_mut(mid);
    let mut inv = count_inversions(left, &mut buf[..mid]) + count_inversions(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if right[j] < left[i] {
            inv += (left.len() - i) as u64;
            buf[k] = right[j];
            j += 1;
        } else {
            buf[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    seq.copy_from_slice(&buf[..n]);
    inv
}

/// Shrinkage family swept by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorFamily {
    Conjugate,
    Sparse,
}

impl PriorFamily {
    pub fn name(self) -> &'static str {
        match self {
            PriorFamily::Conjugate => "conjugate",
            PriorFamily::Sparse => "sparse",
        }
    }
}

/// Grid specification of a Monte Carlo sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: PriorFamily,
    /// Prior concentrations (`kappa0` or `lambda` values).
    pub hyper_grid: Vec<f64>,
    /// Prior location; required for the conjugate family.
    pub mu0: Option<Direction>,
    pub k_grid: Vec<usize>,
    pub replications: usize,
}

/// Per-cell summary of a sweep: grids, mean similarity, empirical 5%/95%
/// quantile envelopes and failure counts, each indexed `[hyper][k]`.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub k_grid: Vec<usize>,
    pub hyper_grid: Vec<f64>,
    pub mean_r: Vec<Vec<f64>>,
    pub q05_r: Vec<Vec<f64>>,
    pub q95_r: Vec<Vec<f64>>,
    pub failures: Vec<Vec<usize>>,
    pub replications: usize,
}

impl SweepResult {
    /// Cells where every replication failed hold NaN statistics.
    pub fn cell_is_empty(&self, hyper_idx: usize, k_idx: usize) -> bool {
        self.mean_r[hyper_idx][k_idx].is_nan()
    }
}

/// Empirical quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(m - 1);
    let frac = h - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Squared inner products with the true direction for one replication,
/// indexed `[hyper_idx * k_len + k_idx]`; `None` marks a failed fit or map.
fn replication_values(
    config: &SimConfig,
    spec: &SweepSpec,
    replication: u64,
) -> Result<Vec<Option<f64>>> {
    let mut rep_config = config.clone();
    rep_config.seed = rng::substream_seed(config.seed, replication);
    let sim = simulate_dataset(&rep_config)?;
    let k_len = spec.k_grid.len();
    let mut values = vec![None; spec.hyper_grid.len() * k_len];
    for (k_idx, &k) in spec.k_grid.iter().enumerate() {
        let fit = match fit_epls(&sim.dataset, k, 1.0) {
            Ok(fit) => fit,
            Err(_) => continue,
        };
        for (h_idx, &hyper) in spec.hyper_grid.iter().enumerate() {
            let map = match spec.family {
                PriorFamily::Conjugate => {
                    let mu0 = spec.mu0.as_ref().expect("validated");
                    conjugate_map(&fit, mu0, hyper).map(|(d, _)| d)
                }
                PriorFamily::Sparse => sparse_map(&fit, hyper),
            };
            if let Ok(direction) = map {
                let c = direction.dot(&config.beta);
                values[h_idx * k_len + k_idx] = Some(c * c);
            }
        }
    }
    Ok(values)
}

/// Runs the sweep: for each replication a fresh dataset from its substream,
/// one EPLS fit per `k`, one MAP per hyperparameter; per-cell mean and
/// 5%/95% envelopes of `<beta_hat, beta>^2` over replications.
///
/// Failed fits are excluded from the statistics and counted per cell. The
/// result is bit-identical regardless of how many replications run in
/// parallel: each replication owns a derived substream and the reduction is
/// done in replication order.
pub fn run_sweep(config: &SimConfig, spec: &SweepSpec) -> Result<SweepResult> {
    config.validate()?;
    if spec.replications < 1 {
        return Err(Error::InvalidInput("need at least one replication".into()));
    }
    if spec.hyper_grid.is_empty() || spec.k_grid.is_empty() {
        return Err(Error::InvalidInput("empty sweep grid".into()));
    }
    if spec.hyper_grid.iter().any(|&h| !h.is_finite() || h < 0.0) {
        return Err(Error::InvalidInput(
            "hyperparameters must be finite and >= 0".into(),
        ));
    }
    match (spec.family, &spec.mu0) {
        (PriorFamily::Conjugate, None) => {
            return Err(Error::InvalidInput(
                "the conjugate family needs a prior location mu0".into(),
            ))
        }
        (_, Some(mu0)) if mu0.dim() != config.p => {
            return Err(Error::InvalidInput(format!(
                "mu0 has dimension {}, expected p={}",
                mu0.dim(),
                config.p
            )));
        }
        _ => {}
    }

    let per_rep = collect_replications(config, spec)?;

    let k_len = spec.k_grid.len();
    let h_len = spec.hyper_grid.len();
    let mut result = SweepResult {
        k_grid: spec.k_grid.clone(),
        hyper_grid: spec.hyper_grid.clone(),
        mean_r: vec![vec![f64::NAN; k_len]; h_len],
        q05_r: vec![vec![f64::NAN; k_len]; h_len],
        q95_r: vec![vec![f64::NAN; k_len]; h_len],
        failures: vec![vec![0; k_len]; h_len],
        replications: spec.replications,
    };
    for h_idx in 0..h_len {
        for k_idx in 0..k_len {
            // Reduction in replication order keeps the output independent of
            // the parallelism degree.
            let mut values: Vec<f64> = per_rep
                .iter()
                .filter_map(|rep| rep[h_idx * k_len + k_idx])
                .collect();
            result.failures[h_idx][k_idx] = spec.replications - values.len();
            if values.is_empty() {
                continue;
            }
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            result.mean_r[h_idx][k_idx] = values.iter().sum::<f64>() / values.len() as f64;
            result.q05_r[h_idx][k_idx] = quantile(&values, 0.05);
            result.q95_r[h_idx][k_idx] = quantile(&values, 0.95);
        }
    }
    Ok(result)
}

#[cfg(feature = "parallel")]
fn collect_replications(config: &SimConfig, spec: &SweepSpec) -> Result<Vec<Vec<Option<f64>>>> {
    use rayon::prelude::*;
    (0..spec.replications as u64)
        .into_par_iter()
        .map(|r| replication_values(config, spec, r))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_replications(config: &SimConfig, spec: &SweepSpec) -> Result<Vec<Vec<Option<f64>>>> {
    (0..spec.replications as u64)
        .map(|r| replication_values(config, spec, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, Array2};

    fn unit(v: &[f64]) -> Direction {
        Direction::from_unnormalized(arr1(v)).unwrap()
    }

    /// Exact noiseless model data: X_i = y_i * beta.
    fn ray_dataset(y: &[f64], beta: &Direction) -> Dataset {
        let p = beta.dim();
        let mut x = Array2::zeros((y.len(), p));
        for (i, &yi) in y.iter().enumerate() {
            for j in 0..p {
                x[[i, j]] = yi * beta.coords()[j];
            }
        }
        Dataset::new(x, arr1(y)).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let beta = unit(&[1.0, 0.0]);
        let ortho = unit(&[0.0, 1.0]);
        assert_eq!(
            similarity_r(&[beta.clone(), beta.negated()], &beta).unwrap(),
            1.0
        );
        assert_eq!(
            similarity_r(&[ortho.clone(), ortho.clone()], &beta).unwrap(),
            0.0
        );
        assert!((similarity_r(&[beta.clone(), ortho], &beta).unwrap() - 0.5).abs() < 1e-15);
        assert!(similarity_r(&[], &beta).is_err());
    }

    #[test]
    fn tail_corr_y_noiseless_is_one() {
        let beta = unit(&[1.0, 1.0]);
        let data = ray_dataset(&[1.0, 2.0, 3.0, 4.0, 5.0, 9.0], &beta);
        let rho = tail_corr_y(&data, &beta, 2.0).unwrap();
        assert!((rho - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tail_corr_y_orthogonal_degenerates() {
        let beta = unit(&[1.0, 1.0]);
        let ortho = unit(&[1.0, -1.0]);
        let data = ray_dataset(&[1.0, 2.0, 3.0, 4.0, 5.0], &beta);
        assert!(matches!(
            tail_corr_y(&data, &ortho, 2.0),
            Err(Error::DegenerateSubsample(_))
        ));
    }

    #[test]
    fn tail_corr_y_sign_flip() {
        let mut config = SimConfig::new(200, 3).unwrap();
        config.snr = 4.0;
        let sim = simulate_dataset(&config).unwrap();
        let beta = unit(&[0.5, 0.5, 0.1]);
        let y = 2.5;
        let a = tail_corr_y(&sim.dataset, &beta, y).unwrap();
        let b = tail_corr_y(&sim.dataset, &beta.negated(), y).unwrap();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn tail_corr_y_too_few_exceedances() {
        let beta = unit(&[1.0, 1.0]);
        let data = ray_dataset(&[1.0, 2.0, 3.0, 4.0, 5.0], &beta);
        assert!(matches!(
            tail_corr_y(&data, &beta, 4.5),
            Err(Error::DegenerateSubsample(_))
        ));
    }

    #[test]
    fn tail_corr_x_self_projection() {
        let e1 = unit(&[1.0, 0.0]);
        let mut config = SimConfig::new(100, 2).unwrap();
        config.snr = 5.0;
        let sim = simulate_dataset(&config).unwrap();
        let rho = tail_corr_x(&sim.dataset, &e1, 2.1, 0).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_corr_x_null_coordinate_small() {
        // Independent noise on a zero coordinate of beta: |rho| stays small.
        let mut config = SimConfig::new(10_000, 4).unwrap();
        config.snr = 10.0;
        let sim = simulate_dataset(&config).unwrap();
        let rho = tail_corr_x(&sim.dataset, &config.beta, 2.2, 3).unwrap();
        assert!(rho.abs() < 0.2, "rho = {rho}");
    }

    #[test]
    fn kendall_tau_matches_brute_force() {
        // Dual route: O(n log n) vs O(n^2), with and without ties.
        let sign = |x: f64, y: f64| -> i64 {
            match x.partial_cmp(&y).unwrap() {
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Greater => 1,
            }
        };
        let brute = |a: &[f64], b: &[f64]| {
            let n = a.len();
            let (mut num, mut ta, mut tb) = (0i64, 0i64, 0i64);
            for i in 0..n {
                for j in i + 1..n {
                    let da = sign(a[i], a[j]);
                    let db = sign(b[i], b[j]);
                    num += da * db;
                    if da == 0 {
                        ta += 1;
                    }
                    if db == 0 {
                        tb += 1;
                    }
                }
            }
            let n0 = (n * (n - 1) / 2) as i64;
            num as f64 / (((n0 - ta) as f64) * ((n0 - tb) as f64)).sqrt()
        };
        let a: Vec<f64> = (0..200)
            .map(|i| (rng::uniform(3, &[1, i]) * 20.0).floor())
            .collect();
        let b: Vec<f64> = (0..200)
            .map(|i| (rng::uniform(3, &[2, i]) * 20.0).floor())
            .collect();
        assert!((empirical_kendall_tau(&a, &b).unwrap() - brute(&a, &b)).abs() < 1e-12);

        let c: Vec<f64> = (0..300).map(|i| rng::uniform(4, &[1, i])).collect();
        let d: Vec<f64> = c.iter().map(|v| v * v).collect();
        assert!((empirical_kendall_tau(&c, &d).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kendall_tau_of_copula_factor() {
        // Simulated (factor, margin) dependence against the closed form.
        let mut config = SimConfig::new(20_000, 2).unwrap();
        config.theta = 8.0;
        let sim = simulate_dataset(&config).unwrap();
        let margin: Vec<f64> = (0..config.n).map(|i| {
            sim.dataset.x()[[i, 0]]
                - sim.dataset.y()[i].powf(config.link_exponent) * config.beta.coords()[0]
        })
        .collect();
        let tau = empirical_kendall_tau(&sim.factor, &margin).unwrap();
        assert!((tau - 0.8).abs() < 0.03, "tau = {tau}");
    }

    #[test]
    fn sweep_reduces_to_epls_at_zero_hyper() {
        let config = SimConfig::new(120, 5).unwrap();
        let k_grid: Vec<usize> = (5..=30).step_by(5).collect();
        let conj = run_sweep(
            &config,
            &SweepSpec {
                family: PriorFamily::Conjugate,
                hyper_grid: vec![0.0, 1e-2],
                mu0: Some(config.beta.clone()),
                k_grid: k_grid.clone(),
                replications: 10,
            },
        )
        .unwrap();
        let sparse = run_sweep(
            &config,
            &SweepSpec {
                family: PriorFamily::Sparse,
                hyper_grid: vec![0.0],
                mu0: None,
                k_grid,
                replications: 10,
            },
        )
        .unwrap();
        // The zero rows of both families are the plain EPLS sweep.
        assert_eq!(conj.mean_r[0], sparse.mean_r[0]);
        assert_eq!(conj.q05_r[0], sparse.q05_r[0]);
        assert_eq!(conj.q95_r[0], sparse.q95_r[0]);
    }

    #[test]
    fn sweep_single_replication_collapses_quantiles() {
        let config = SimConfig::new(80, 4).unwrap();
        let result = run_sweep(
            &config,
            &SweepSpec {
                family: PriorFamily::Sparse,
                hyper_grid: vec![0.0, 1e-3],
                mu0: None,
                k_grid: vec![10, 20],
                replications: 1,
            },
        )
        .unwrap();
        for h in 0..2 {
            for k in 0..2 {
                assert_eq!(result.mean_r[h][k], result.q05_r[h][k]);
                assert_eq!(result.mean_r[h][k], result.q95_r[h][k]);
            }
        }
    }

    #[test]
    fn sweep_counts_failures_at_k1() {
        let config = SimConfig::new(60, 4).unwrap();
        let result = run_sweep(
            &config,
            &SweepSpec {
                family: PriorFamily::Sparse,
                hyper_grid: vec![0.0],
                mu0: None,
                k_grid: vec![1, 10],
                replications: 5,
            },
        )
        .unwrap();
        // k = 1 always produces a zero v_hat, hence all replications fail.
        assert_eq!(result.failures[0][0], 5);
        assert!(result.cell_is_empty(0, 0));
        assert_eq!(result.failures[0][1], 0);
        assert!(result.mean_r[0][1] >= 0.0 && result.mean_r[0][1] <= 1.0);
    }

    #[test]
    fn sweep_envelopes_bracket_mean() {
        let config = SimConfig::new(150, 6).unwrap();
        let result = run_sweep(
            &config,
            &SweepSpec {
                family: PriorFamily::Conjugate,
                hyper_grid: vec![0.0, 3e-3],
                mu0: Some(SimConfig::default_beta(6).unwrap()),
                k_grid: (2..=40).collect(),
                replications: 20,
            },
        )
        .unwrap();
        for h in 0..result.hyper_grid.len() {
            for k in 0..result.k_grid.len() {
                if result.cell_is_empty(h, k) {
                    continue;
                }
                let (m, lo, hi) = (result.mean_r[h][k], result.q05_r[h][k], result.q95_r[h][k]);
                assert!((0.0..=1.0).contains(&m));
                assert!(lo <= m + 1e-12 && m <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn sweep_requires_mu0_for_conjugate() {
        let config = SimConfig::new(60, 4).unwrap();
        let err = run_sweep(
            &config,
            &SweepSpec {
                family: PriorFamily::Conjugate,
                hyper_grid: vec![0.0],
                mu0: None,
                k_grid: vec![10],
                replications: 2,
            },
        );
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }
}
