//! Implementations of the five subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array1;

use sepals::epls::{fit_epls, fit_epls_at_threshold, Direction, FitResult};
use sepals::metrics::{run_sweep, tail_corr_x, tail_corr_y, PriorFamily, SweepResult, SweepSpec};
use sepals::shrinkage::{conjugate_map, sparse_map};
use sepals::simulate::simulate_dataset;
use sepals::tail::{hill_curve, qq_data};

use crate::args::*;
use crate::errors::{CliError, CliResult};
use crate::ioutil::*;

pub fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let args = match &args.config {
        Some(path) => args.clone().merge(load_config(path)?),
        None => args,
    };
    let config = args.sim.resolve()?;
    let out = required(args.out, "out")?;
    let sim = simulate_dataset(&config)?;
    write_dataset(&out, &sim.dataset)?;
    write_manifest(
        &out,
        "simulate",
        args.sim.to_json(&config),
        Some(config.seed),
    )?;
    Ok(())
}

fn parse_direction(raw: &str, p: usize, flag: &str) -> CliResult<Direction> {
    let coords = parse_real_list(raw)?;
    if coords.len() != p {
        return Err(CliError::Usage(format!(
            "--{flag} has {} coordinates, expected p={p}",
            coords.len()
        )));
    }
    Direction::from_unnormalized(Array1::from(coords))
        .map_err(|_| CliError::Usage(format!("--{flag} must be a nonzero vector")))
}

/// Echo of the resolved prior, embedded in the fit JSON and the manifest.
fn prior_json(prior: PriorArg, kappa0: f64, mu0: Option<&Direction>, lambda: f64) -> serde_json::Value {
    match prior {
        PriorArg::None => serde_json::json!({ "family": "none" }),
        PriorArg::Conjugate => serde_json::json!({
            "family": "conjugate",
            "kappa0": kappa0,
            "mu0": mu0.map(|d| d.as_slice().to_vec()),
        }),
        PriorArg::Sparse => serde_json::json!({ "family": "sparse", "lambda": lambda }),
    }
}

pub fn cmd_fit(args: FitArgs) -> CliResult<()> {
    let args = match &args.config {
        Some(path) => args.clone().merge(load_config(path)?),
        None => args,
    };
    let data_path = required(args.data, "data")?;
    let y_col = args.y_col.unwrap_or_else(|| "y".to_string());
    let theta_n = args.theta_n.unwrap_or(1.0);
    let prior = args.prior.unwrap_or(PriorArg::None);
    let kappa0 = args.kappa0.unwrap_or(0.0);
    let lambda = args.lambda.unwrap_or(0.0);

    let data = read_dataset(&data_path, &y_col)?;
    let data = if args.standardize {
        standardize_columns(&data)
    } else {
        data
    };

    let fit: FitResult = match (args.k, args.threshold) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--k and --threshold are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --k or --threshold is required".into(),
            ))
        }
        (Some(k), None) => fit_epls(&data, k, theta_n)?,
        (None, Some(y)) => fit_epls_at_threshold(&data, y, theta_n)?,
    };

    let mu0 = match (prior, &args.mu0) {
        (PriorArg::Conjugate, None) => {
            return Err(CliError::Usage(
                "--prior conjugate requires --mu0".into(),
            ))
        }
        (PriorArg::Conjugate, Some(raw)) => Some(parse_direction(raw, data.p(), "mu0")?),
        _ => None,
    };

    let mut posterior_kappa = None;
    let mut nonzero_support: Option<Vec<usize>> = None;
    let beta = match prior {
        PriorArg::None => fit.beta.clone(),
        PriorArg::Conjugate => {
            let (map, kappa_n) = conjugate_map(&fit, mu0.as_ref().expect("checked"), kappa0)?;
            posterior_kappa = Some(kappa_n);
            map
        }
        PriorArg::Sparse => {
            let map = sparse_map(&fit, lambda)?;
            nonzero_support = Some(
                (0..map.dim())
                    .filter(|&j| map.coords()[j] != 0.0)
                    .map(|j| j + 1)
                    .collect(),
            );
            map
        }
    };

    let mut result = serde_json::json!({
        "beta": beta.as_slice().to_vec(),
        "k_effective": fit.k,
        "y_threshold": fit.y_threshold,
        "v_norm": fit.v_norm,
        "k_n": fit.k_n,
        "theta_n": theta_n,
        "prior": prior_json(prior, kappa0, mu0.as_ref(), lambda),
        "standardize": args.standardize,
    });
    if let Some(kappa_n) = posterior_kappa {
        result["posterior_kappa"] = serde_json::json!(kappa_n);
    }
    if let Some(support) = &nonzero_support {
        result["nonzero_support"] = serde_json::json!(support);
    }

    let rendered = serde_json::to_string_pretty(&result).expect("valid json");
    match &args.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            writeln!(file, "{rendered}")?;
            file.flush()?;
            write_manifest(
                path,
                "fit",
                serde_json::json!({
                    "data": data_path.display().to_string(),
                    "k": args.k,
                    "threshold": args.threshold,
                    "theta_n": theta_n,
                    "prior": prior_json(prior, kappa0, mu0.as_ref(), lambda),
                    "standardize": args.standardize,
                    "y_col": y_col,
                }),
                None,
            )?;
        }
        None => println!("{rendered}"),
    }
    Ok(())
}

pub fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let args = match &args.config {
        Some(path) => args.clone().merge(load_config(path)?),
        None => args,
    };
    let config = args.sim.resolve()?;
    let family = required(args.family, "family")?;
    let hyper_grid = parse_real_list(&required(args.hyper_grid.clone(), "hyper-grid")?)?;
    let out = required(args.out.clone(), "out")?;
    let k_min = args.k_min.unwrap_or(1);
    let k_max = args.k_max.unwrap_or(100);
    if k_min < 1 || k_max < k_min {
        return Err(CliError::Usage(format!(
            "bad exceedance range {k_min}..{k_max}"
        )));
    }
    let reps = args.reps.unwrap_or(100);
    let jobs = args.jobs.unwrap_or(1).max(1);

    let spec = SweepSpec {
        family: match family {
            FamilyArg::Conjugate => PriorFamily::Conjugate,
            FamilyArg::Sparse => PriorFamily::Sparse,
        },
        hyper_grid,
        mu0: match (family, &args.mu0) {
            (FamilyArg::Conjugate, None) => {
                return Err(CliError::Usage(
                    "--family conjugate requires --mu0".into(),
                ))
            }
            (_, Some(raw)) => Some(parse_direction(raw, config.p, "mu0")?),
            (FamilyArg::Sparse, None) => None,
        },
        k_grid: (k_min..=k_max).collect(),
        replications: reps,
    };

    // The replication substreams make the result identical for every jobs
    // value; the pool only bounds the parallelism.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let result = pool.install(|| run_sweep(&config, &spec))?;

    write_sweep_csv(&out, spec.family, &result)?;
    warn_failed_cells(spec.family, &result);
    write_manifest(
        &out,
        "sweep",
        serde_json::json!({
            "family": spec.family.name(),
            "hyper_grid": spec.hyper_grid,
            "mu0": spec.mu0.as_ref().map(|d| d.as_slice().to_vec()),
            "k_min": k_min,
            "k_max": k_max,
            "reps": reps,
            "sim": args.sim.to_json(&config),
        }),
        Some(config.seed),
    )?;
    Ok(())
}

fn write_sweep_csv(path: &Path, family: PriorFamily, result: &SweepResult) -> CliResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "family,hyper,k,mean_r,q05,q95,failures")?;
    for (h_idx, &hyper) in result.hyper_grid.iter().enumerate() {
        for (k_idx, &k) in result.k_grid.iter().enumerate() {
            let stat = |v: f64| if v.is_nan() { String::new() } else { fmt_real(v) };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                family.name(),
                fmt_real(hyper),
                k,
                stat(result.mean_r[h_idx][k_idx]),
                stat(result.q05_r[h_idx][k_idx]),
                stat(result.q95_r[h_idx][k_idx]),
                result.failures[h_idx][k_idx],
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn warn_failed_cells(family: PriorFamily, result: &SweepResult) {
    for (h_idx, &hyper) in result.hyper_grid.iter().enumerate() {
        for (k_idx, &k) in result.k_grid.iter().enumerate() {
            let failures = result.failures[h_idx][k_idx];
            if failures * 10 > result.replications {
                eprintln!(
                    "warning: cell (family={}, hyper={}, k={}) failed in {}/{} replications",
                    family.name(),
                    hyper,
                    k,
                    failures,
                    result.replications
                );
            }
        }
    }
}

pub fn cmd_tail(args: TailArgs) -> CliResult<()> {
    let args = match &args.config {
        Some(path) => args.clone().merge(load_config(path)?),
        None => args,
    };
    let data_path = required(args.data, "data")?;
    let k_max = required(args.k_max, "k-max")?;
    let k_qq = required(args.k, "k")?;
    let y_col = args.y_col.unwrap_or_else(|| "y".to_string());
    let out_dir = args.out_dir.unwrap_or_else(|| ".".into());

    let data = read_dataset(&data_path, &y_col)?;
    let responses = data.y_slice();

    let curve = hill_curve(responses, k_max)?;
    let qq = qq_data(responses, k_qq)?;

    std::fs::create_dir_all(&out_dir)?;
    let mut hill_out = BufWriter::new(File::create(out_dir.join("hill.csv"))?);
    writeln!(hill_out, "k,gamma_hat,ci_low,ci_high")?;
    for i in 0..curve.k_values.len() {
        writeln!(
            hill_out,
            "{},{},{},{}",
            curve.k_values[i],
            fmt_real(curve.gamma_hat[i]),
            fmt_real(curve.ci_low[i]),
            fmt_real(curve.ci_high[i]),
        )?;
    }
    hill_out.flush()?;

    let mut qq_out = BufWriter::new(File::create(out_dir.join("qq.csv"))?);
    writeln!(qq_out, "x,y")?;
    for &(x, y) in &qq.points {
        writeln!(qq_out, "{},{}", fmt_real(x), fmt_real(y))?;
    }
    qq_out.flush()?;

    let (bins, counts) = freedman_diaconis_bins(responses);
    let mut hist_out = BufWriter::new(File::create(out_dir.join("hist.csv"))?);
    writeln!(hist_out, "bin_left,bin_right,count")?;
    for (i, &count) in counts.iter().enumerate() {
        writeln!(
            hist_out,
            "{},{},{}",
            fmt_real(bins[i]),
            fmt_real(bins[i + 1]),
            count
        )?;
    }
    hist_out.flush()?;

    write_manifest(
        &out_dir.join("tail"),
        "tail",
        serde_json::json!({
            "data": data_path.display().to_string(),
            "k_max": k_max,
            "k": k_qq,
            "y_col": y_col,
            "qq_slope": qq.slope,
        }),
        None,
    )?;
    println!("{}", serde_json::json!({ "qq_slope": qq.slope }));
    Ok(())
}

/// Histogram bin edges by the Freedman–Diaconis rule; falls back to a single
/// bin when the interquartile range vanishes.
fn freedman_diaconis_bins(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let quant = |q: f64| {
        let h = (n - 1) as f64 * q;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        sorted[lo] * (1.0 - (h - lo as f64)) + sorted[hi] * (h - lo as f64)
    };
    let iqr = quant(0.75) - quant(0.25);
    let (min, max) = (sorted[0], sorted[n - 1]);
    let width = 2.0 * iqr / (n as f64).cbrt();
    let bin_count = if width > 0.0 && max > min {
        (((max - min) / width).ceil() as usize).clamp(1, 10_000)
    } else {
        1
    };
    let step = if max > min {
        (max - min) / bin_count as f64
    } else {
        1.0
    };
    let edges: Vec<f64> = (0..=bin_count).map(|i| min + step * i as f64).collect();
    let mut counts = vec![0usize; bin_count];
    for &v in values {
        let idx = (((v - min) / step) as usize).min(bin_count - 1);
        counts[idx] += 1;
    }
    (edges, counts)
}

pub fn cmd_tailcorr(args: TailcorrArgs) -> CliResult<()> {
    let args = match &args.config {
        Some(path) => args.clone().merge(load_config(path)?),
        None => args,
    };
    let data_path = required(args.data, "data")?;
    let family = args.family.unwrap_or(FamilyArg::Sparse);
    if family != FamilyArg::Sparse {
        return Err(CliError::Usage(
            "only --family sparse is supported for tail correlations".into(),
        ));
    }
    let k_grid = parse_k_grid(&required(args.k_grid.clone(), "k-grid")?)?;
    let theta_n = args.theta_n.unwrap_or(1.0);
    let y_col = args.y_col.unwrap_or_else(|| "y".to_string());
    let out = required(args.out.clone(), "out")?;
    let data = read_dataset(&data_path, &y_col)?;

    enum Mode {
        ResponseGrid(Vec<f64>),
        PerCoordinate(f64),
    }
    let mode = match (&args.lambda_grid, args.lambda) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--lambda-grid and --lambda are mutually exclusive".into(),
            ))
        }
        (Some(raw), None) => Mode::ResponseGrid(parse_real_list(raw)?),
        (None, Some(lambda)) => Mode::PerCoordinate(lambda),
        (None, None) => {
            return Err(CliError::Usage(
                "one of --lambda-grid or --lambda is required".into(),
            ))
        }
    };

    let mut file = BufWriter::new(File::create(&out)?);
    let mut argmax: Option<(usize, f64, f64)> = None;
    match &mode {
        Mode::ResponseGrid(lambdas) => {
            writeln!(file, "k,lambda,rho_y,degenerate")?;
            for &k in &k_grid {
                let fit = fit_epls(&data, k, theta_n).ok();
                for &lambda in lambdas {
                    let rho = fit.as_ref().and_then(|fit| {
                        sparse_map(fit, lambda)
                            .ok()
                            .and_then(|beta| tail_corr_y(&data, &beta, fit.y_threshold).ok())
                    });
                    match rho {
                        Some(rho) => {
                            writeln!(file, "{k},{},{},0", fmt_real(lambda), fmt_real(rho))?;
                            if argmax.map_or(true, |(_, _, best)| rho > best) {
                                argmax = Some((k, lambda, rho));
                            }
                        }
                        None => writeln!(file, "{k},{},,1", fmt_real(lambda))?,
                    }
                }
            }
        }
        Mode::PerCoordinate(lambda) => {
            writeln!(file, "k,j,rho_xj,degenerate")?;
            for &k in &k_grid {
                let beta = fit_epls(&data, k, theta_n)
                    .ok()
                    .and_then(|fit| sparse_map(&fit, *lambda).ok().map(|b| (fit, b)));
                for j in 0..data.p() {
                    let rho = beta
                        .as_ref()
                        .and_then(|(fit, b)| tail_corr_x(&data, b, fit.y_threshold, j).ok());
                    match rho {
                        Some(rho) => writeln!(file, "{k},{},{},0", j + 1, fmt_real(rho))?,
                        None => writeln!(file, "{k},{},,1", j + 1)?,
                    }
                }
            }
        }
    }
    file.flush()?;

    if let Mode::ResponseGrid(_) = mode {
        let report = match argmax {
            Some((k, lambda, rho)) => serde_json::json!({
                "argmax": { "k": k, "lambda": lambda, "rho_y": rho }
            }),
            None => serde_json::json!({ "argmax": null }),
        };
        println!("{report}");
    }

    write_manifest(
        &out,
        "tailcorr",
        serde_json::json!({
            "data": data_path.display().to_string(),
            "family": "sparse",
            "lambda_grid": args.lambda_grid,
            "lambda": args.lambda,
            "k_grid": args.k_grid,
            "theta_n": theta_n,
            "y_col": y_col,
        }),
        None,
    )?;
    Ok(())
}
