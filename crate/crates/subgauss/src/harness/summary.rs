//! Aggregation of emitted metric tables: per-cell means and quantiles
//! keyed by one column, plus a log-log slope fit across cells.

use super::csvio::{format_real, parse_real, read_csv, CsvTable};
use crate::empirical::least_squares_slope;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct SummaryOptions {
    /// Column whose distinct values index the aggregation cells.
    pub key: String,
    /// Column aggregated within each cell.
    pub value: String,
}

/// Aggregate one or more schema-compatible CSVs: per-key mean, median,
/// decile band and count, plus a footer row holding the least-squares
/// slope of log(mean value) against log(key) with its standard error.
pub fn summarize(paths: &[&Path], options: &SummaryOptions) -> Result<CsvTable> {
    if paths.is_empty() {
        return Err(Error::Config("summarize: no input files".into()));
    }
    let mut cells: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    let mut reference: Option<CsvTable> = None;
    for path in paths {
        let table = read_csv(path)?;
        if let Some(r) = &reference {
            if r.columns != table.columns {
                return Err(Error::Config(format!(
                    "{}: schema {:?} does not match {:?}",
                    path.display(),
                    table.columns,
                    r.columns
                )));
            }
        }
        let key_col = table
            .column_index(&options.key)
            .ok_or_else(|| Error::Config(format!("missing key column '{}'", options.key)))?;
        let value_col = table
            .column_index(&options.value)
            .ok_or_else(|| Error::Config(format!("missing value column '{}'", options.value)))?;
        for row in &table.rows {
            if row[key_col].is_empty() || row[value_col].is_empty() {
                continue; // footer or padding row
            }
            let key = parse_real(&row[key_col])?;
            let value = parse_real(&row[value_col])?;
            cells
                .entry(key.to_bits())
                .or_insert_with(|| (key, Vec::new()))
                .1
                .push(value);
        }
        if reference.is_none() {
            reference = Some(table);
        }
    }
    let reference = reference.unwrap();
    let mut out = CsvTable::new(reference.config_hash, reference.base_seed, &[
        "key",
        "count",
        "mean",
        "variance",
        "median",
        "q10",
        "q90",
        "loglog_slope",
        "slope_std_err",
    ]);
    let mut log_pairs: Vec<(f64, f64)> = Vec::new();
    for (_, (key, mut values)) in cells {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        out.push_row(vec![
            format_real(key),
            values.len().to_string(),
            format_real(mean),
            format_real(variance),
            format_real(quantile(&values, 0.5)),
            format_real(quantile(&values, 0.1)),
            format_real(quantile(&values, 0.9)),
            String::new(),
            String::new(),
        ]);
        if key > 0.0 && mean > 0.0 {
            log_pairs.push((key.ln(), mean.ln()));
        }
    }
    if log_pairs.len() >= 2 {
        let xs: Vec<f64> = log_pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = log_pairs.iter().map(|p| p.1).collect();
        let slope = least_squares_slope(&xs, &ys);
        out.push_row(vec![
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            format_real(slope),
            format_real(slope_std_err(&xs, &ys, slope)),
        ]);
    }
    Ok(out)
}

/// Linear-interpolated quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn slope_std_err(xs: &[f64], ys: &[f64], slope: f64) -> f64 {
    let n = xs.len() as f64;
    if xs.len() <= 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_x: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (ss_res / (n - 2.0) / ss_x).sqrt()
}
