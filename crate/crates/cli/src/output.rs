use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qvlms::experiment::{to_db, AveragedCurves, CellResult};
use serde::Serialize;

/// One iteration of one averaged (or predicted) learning curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow<'a> {
    pub iteration: usize,
    pub algorithm: &'a str,
    pub q: Option<f64>,
    pub snr_db: f64,
    pub nwd: f64,
    pub nwd_db: f64,
    pub mae: f64,
    /// Mean squared output error; empty for theory rows.
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow<'a> {
    pub algorithm: &'a str,
    pub q: Option<f64>,
    pub snr_db: f64,
    pub steady_state_nwd_db: Option<f64>,
    pub correlation: Option<f64>,
    pub divergence_count: usize,
}

pub fn simulated_rows(cell: &CellResult, curves: &AveragedCurves) -> Vec<CurveRow<'static>> {
    (0..curves.nwd.len())
        .map(|i| CurveRow {
            iteration: i,
            algorithm: cell.algorithm.label(),
            q: cell.q,
            snr_db: cell.snr_db,
            nwd: curves.nwd[i],
            nwd_db: to_db(curves.nwd[i]),
            mae: curves.mae[i],
            mse: Some(curves.sq_error[i]),
        })
        .collect()
}

pub fn theory_rows(q: f64, snr_db: f64, nwd: &[f64], mae: &[f64]) -> Vec<CurveRow<'static>> {
    nwd.iter()
        .zip(mae)
        .enumerate()
        .map(|(i, (&n, &m))| CurveRow {
            iteration: i,
            algorithm: "theory",
            q: Some(q),
            snr_db,
            nwd: n,
            nwd_db: to_db(n),
            mae: m,
            mse: None,
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

/// Two-column whitespace-separated series.
pub fn write_dat(path: &Path, header: &str, ys: &[f64]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {header}")?;
    for (i, y) in ys.iter().enumerate() {
        writeln!(w, "{i} {y:e}")?;
    }
    w.flush()
}

/// `5` rather than `5.0`, for file names.
pub fn tag(x: f64) -> String {
    format!("{x}")
}
