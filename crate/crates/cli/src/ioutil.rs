//! Dataset CSV reading, numeric formatting and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use sepals::Dataset;

use crate::errors::{CliError, CliResult};

/// Locale-independent real formatting: 17 significant digits, '.' separator.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a dataset: the response is the column named `y_col` (default `y`,
/// conventionally last); every other column is a covariate in file order.
pub fn read_dataset(path: &Path, y_col: &str) -> CliResult<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let y_idx = headers
        .iter()
        .position(|h| h == y_col)
        .ok_or_else(|| CliError::Io(format!("no column named '{y_col}' in {}", path.display())))?;
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let p = headers.len() - 1;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(CliError::Io(format!(
                "row {} has {} fields, expected {}",
                row_idx + 1,
                record.len(),
                headers.len()
            )));
        }
        for (col_idx, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::Io(format!(
                    "row {}, column '{}': cannot parse '{field}' as a real",
                    row_idx + 1,
                    &headers[col_idx]
                ))
            })?;
            if col_idx == y_idx {
                ys.push(value);
            } else {
                xs.push(value);
            }
        }
    }
    let n = ys.len();
    let x = Array2::from_shape_vec((n, p), xs)
        .map_err(|e| CliError::Io(format!("bad dataset shape: {e}")))?;
    Ok(Dataset::new(x, Array1::from(ys))?)
}

/// Writes a dataset with header `x1,...,xp,y`.
pub fn write_dataset(path: &Path, data: &Dataset) -> CliResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (1..=data.p())
        .map(|j| format!("x{j}"))
        .chain(std::iter::once("y".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..data.n() {
        let mut fields: Vec<String> = (0..data.p())
            .map(|j| fmt_real(data.x()[[i, j]]))
            .collect();
        fields.push(fmt_real(data.y()[i]));
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Divides each covariate column by its sample standard deviation
/// (denominator n-1); zero-variance columns are left unscaled.
pub fn standardize_columns(data: &Dataset) -> Dataset {
    let mut x = data.x().clone();
    let n = data.n() as f64;
    for mut col in x.columns_mut() {
        let mean = col.sum() / n;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1.0)).sqrt();
        if sd > 0.0 {
            col.mapv_inplace(|v| v / sd);
        }
    }
    Dataset::new(x, data.y().clone()).expect("standardising preserves validity")
}

/// Writes `<out>.manifest.json` describing a command invocation.
pub fn write_manifest(
    out_path: &Path,
    command: &str,
    params: serde_json::Value,
    seed: Option<u64>,
) -> CliResult<()> {
    let manifest = serde_json::json!({
        "command": command,
        "params": params,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    });
    let path = manifest_path(out_path);
    let mut file = BufWriter::new(File::create(&path)?);
    writeln!(file, "{}", serde_json::to_string_pretty(&manifest).expect("valid json"))?;
    file.flush()?;
    Ok(())
}

pub fn manifest_path(out_path: &Path) -> PathBuf {
    let mut name = out_path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out_path.with_file_name(name)
}

/// Parses a comma-separated list of reals.
pub fn parse_real_list(raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse '{tok}' as a real")))
        })
        .collect()
}

/// Parses an integer grid: either a comma list (`20,50,100`) or a range
/// `start:end[:step]` with inclusive endpoints.
pub fn parse_k_grid(raw: &str) -> CliResult<Vec<usize>> {
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(CliError::Usage(format!(
                "range must be start:end or start:end:step, got '{raw}'"
            )));
        }
        let parse = |tok: &str| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("cannot parse '{tok}' as an integer")))
        };
        let start = parse(parts[0])?;
        let end = parse(parts[1])?;
        let step = if parts.len() == 3 { parse(parts[2])? } else { 1 };
        if step == 0 || end < start {
            return Err(CliError::Usage(format!("empty range '{raw}'")));
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        raw.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("cannot parse '{tok}' as an integer")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_is_17_digits_and_round_trips() {
        for &x in &[1.0, -0.25, 6.931448431551464e120, 1e-7, 0.0] {
            let s = fmt_real(x);
            assert!(!s.contains(','));
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_real(2.5), "2.5000000000000000e0");
    }

    #[test]
    fn k_grid_forms() {
        assert_eq!(parse_k_grid("3,9,27").unwrap(), vec![3, 9, 27]);
        assert_eq!(parse_k_grid("2:6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_k_grid("2:10:4").unwrap(), vec![2, 6, 10]);
        assert!(parse_k_grid("5:1").is_err());
        assert!(parse_k_grid("a:b").is_err());
    }

    #[test]
    fn real_list_parsing() {
        assert_eq!(parse_real_list("0,1e-4,3e-3").unwrap(), vec![0.0, 1e-4, 3e-3]);
        assert!(parse_real_list("0,x").is_err());
    }
}
