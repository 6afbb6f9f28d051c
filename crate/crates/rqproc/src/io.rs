//! CSV ingestion and emission. Floats are written with 17 significant
//! digits so every value survives a write/read round trip unchanged.

use std::fs::File;
use std::path::Path;

use rqproc_core::{ProcessKind, QuantileProcess, RQSolution, RegressionData, ShortfallReport, StepCDF, TwoStepRQ};

use crate::error::{CliError, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(path, source),
        kind => CliError::Format { path: path.to_path_buf(), message: format!("{kind:?}") },
    }
}

/// A numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = rdr.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::Format { path: path.to_path_buf(), message: "missing header row".into() });
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { len, expected_len, .. } => CliError::Parse {
                path: path.to_path_buf(),
                row,
                column: String::new(),
                message: format!("{len} fields, header has {expected_len}"),
            },
            _ => csv_err(path, e),
        })?;
        let mut vals = Vec::with_capacity(header.len());
        for (cell, name) in rec.iter().zip(&header) {
            let parse_err =
                |message: String| CliError::Parse { path: path.to_path_buf(), row, column: name.clone(), message };
            let v: f64 = cell.parse().map_err(|_| parse_err(format!("cannot parse '{cell}' as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value '{cell}'")));
            }
            vals.push(v);
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(CliError::Format { path: path.to_path_buf(), message: "no data rows".into() });
    }
    Ok(Table { header, rows })
}

/// Regression data from a CSV: one response column (by name, default the
/// first column), all other columns are covariates.
pub fn read_regression(path: &Path, response_col: Option<&str>) -> Result<(RegressionData, Vec<String>)> {
    let table = read_table(path)?;
    let yc = match response_col {
        None => 0,
        Some(name) => table.column(name).ok_or_else(|| {
            CliError::Usage(format!(
                "{}: no column named '{name}' (columns: {})",
                path.display(),
                table.header.join(", ")
            ))
        })?,
    };
    let response = table.rows.iter().map(|r| r[yc]).collect();
    let rows: Vec<Vec<f64>> =
        table.rows.iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != yc).map(|(_, &v)| v).collect()).collect();
    let names = table.header.iter().enumerate().filter(|&(j, _)| j != yc).map(|(_, h)| h.clone()).collect();
    Ok((RegressionData::from_rows(&rows, response)?, names))
}

/// A process table (`alpha_lo, alpha_hi, value, ...`) read back into a
/// step process. Intervals must tile (0,1) in order.
pub fn read_process(path: &Path) -> Result<QuantileProcess> {
    let table = read_table(path)?;
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| CliError::Format { path: path.to_path_buf(), message: format!("missing column '{name}'") })
    };
    let (lo, hi, val) = (col("alpha_lo")?, col("alpha_hi")?, col("value")?);
    let bad = |row: usize, message: &str| CliError::Parse {
        path: path.to_path_buf(),
        row,
        column: "alpha_lo".into(),
        message: message.into(),
    };
    if table.rows[0][lo] != 0.0 {
        return Err(bad(1, "first interval must start at 0"));
    }
    for (k, w) in table.rows.windows(2).enumerate() {
        if w[1][lo] != w[0][hi] {
            return Err(bad(k + 2, "interval does not start where the previous one ends"));
        }
    }
    if table.rows.last().map(|r| r[hi]) != Some(1.0) {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            row: table.rows.len(),
            column: "alpha_hi".into(),
            message: "last interval must end at 1".into(),
        });
    }
    let breakpoints = table.rows[1..].iter().map(|r| r[lo]).collect();
    let values = table.rows.iter().map(|r| r[val]).collect();
    Ok(QuantileProcess::new(breakpoints, values, ProcessKind::Custom)?)
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn indexed(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (0..count).map(move |j| format!("{prefix}_{j}"))
}

/// One-row table: `alpha, objective, coef_0.., basis_0..` (0-based rows).
pub fn solution_table(sol: &RQSolution) -> (Vec<String>, Vec<Vec<String>>) {
    let m = sol.coefficients.len();
    let mut header = vec!["alpha".to_owned(), "objective".to_owned()];
    header.extend(indexed("coef", m));
    header.extend(indexed("basis", sol.basis.len()));
    let mut row = vec![fmt_f64(sol.alpha), fmt_f64(sol.objective)];
    row.extend(sol.coefficients.iter().map(|&c| fmt_f64(c)));
    row.extend(sol.basis.iter().map(usize::to_string));
    (header, vec![row])
}

/// `alpha_lo, alpha_hi, value`, then `coef_*` and `basis_*` when the
/// process carries per-interval regression quantiles.
pub fn process_table(proc: &QuantileProcess) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["alpha_lo".to_owned(), "alpha_hi".to_owned(), "value".to_owned()];
    let meta = proc.meta();
    if let Some(first) = meta.first() {
        header.extend(indexed("coef", first.coefficients.len()));
        header.extend(indexed("basis", first.basis.len()));
    }
    let rows = (0..proc.interval_count())
        .map(|k| {
            let (lo, hi) = proc.interval(k);
            let mut row = vec![fmt_f64(lo), fmt_f64(hi), fmt_f64(proc.values()[k])];
            if let Some(m) = meta.get(k) {
                row.extend(m.coefficients.iter().map(|&c| fmt_f64(c)));
                row.extend(m.basis.iter().map(usize::to_string));
            }
            row
        })
        .collect();
    (header, rows)
}

/// Two-step process, one row per order statistic of the residuals, with
/// the intercept `β̃₀` and the R-estimated slopes.
pub fn two_step_table(fit: &TwoStepRQ) -> (Vec<String>, Vec<Vec<String>>) {
    let proc = fit.order_statistic_process();
    let mut header = vec!["alpha_lo".to_owned(), "alpha_hi".to_owned(), "value".to_owned()];
    header.extend(indexed("coef", fit.slopes.len() + 1));
    let shift = fit.averaged(1.0).expect("α = 1 is admissible") - fit.intercept(1.0).expect("α = 1 is admissible");
    let rows = (0..proc.interval_count())
        .map(|k| {
            let (lo, hi) = proc.interval(k);
            let v = proc.values()[k];
            let mut row = vec![fmt_f64(lo), fmt_f64(hi), fmt_f64(v), fmt_f64(v - shift)];
            row.extend(fit.slopes.iter().map(|&b| fmt_f64(b)));
            row
        })
        .collect();
    (header, rows)
}

pub fn cdf_table(f: &StepCDF) -> (Vec<String>, Vec<Vec<String>>) {
    let header = vec!["z".to_owned(), "F".to_owned()];
    let rows = f.atoms().iter().zip(f.cum_probs()).map(|(&z, &c)| vec![fmt_f64(z), fmt_f64(c)]).collect();
    (header, rows)
}

pub fn shortfall_table(r: &ShortfallReport) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["alpha", "method", "shortfall", "tail_mean", "quantile_at_alpha"].map(str::to_owned).to_vec();
    let method = match r.method {
        ProcessKind::TwoStep { lambda } => format!("twostep({lambda})"),
        k => k.label().to_owned(),
    };
    let row = vec![fmt_f64(r.alpha), method, fmt_f64(r.shortfall), fmt_f64(r.tail_mean), fmt_f64(r.quantile_at_alpha)];
    (header, vec![row])
}
