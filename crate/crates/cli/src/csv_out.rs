//! Plot-ready CSV artifacts.

use std::path::Path;

use anyhow::{Context, Result};
use cann::discovery::ModeContributions;
use cann::energy::N_TERMS;
use cann::stress::StressResult;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn term_headers() -> impl Iterator<Item = String> {
    (1..=N_TERMS).map(|k| format!("term_{k}"))
}

/// `lambda,p_model,p_data,term_1..term_8` at every data point of one mode.
pub fn write_fit_curve(path: &Path, c: &ModeContributions) -> Result<()> {
    let mut w = writer(path)?;
    let header: Vec<String> = ["lambda", "p_model", "p_data"].into_iter().map(String::from).chain(term_headers()).collect();
    w.write_record(&header)?;
    for i in 0..c.lambda.len() {
        let mut row = vec![c.lambda[i].to_string(), c.p_model[i].to_string(), c.p_data[i].to_string()];
        row.extend(c.terms[i].iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `epoch,mse`, epochs counted from one.
pub fn write_loss(path: &Path, history: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["epoch", "mse"])?;
    for (i, l) in history.iter().enumerate() {
        w.write_record([(i + 1).to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `lambda,p_model,p2_model,pressure,term_1..term_8`; `p2_model` is empty in
/// uniaxial tension.
pub fn write_prediction(path: &Path, grid: &[f64], points: &[StressResult], terms: &[[f64; N_TERMS]]) -> Result<()> {
    let mut w = writer(path)?;
    let header: Vec<String> =
        ["lambda", "p_model", "p2_model", "pressure"].into_iter().map(String::from).chain(term_headers()).collect();
    w.write_record(&header)?;
    for ((l, p), t) in grid.iter().zip(points).zip(terms) {
        let mut row = vec![l.to_string(), p.p1.to_string(), p.p2.map_or(String::new(), |v| v.to_string()), p.pressure.to_string()];
        row.extend(t.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `lambda,p_model,p_data,extrapolated`; rows past the data have no `p_data`.
pub fn write_baseline_curve(path: &Path, rows: &[(f64, f64, Option<f64>)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["lambda", "p_model", "p_data", "extrapolated"])?;
    for &(l, p, d) in rows {
        let extrapolated = if d.is_none() { "1" } else { "0" };
        w.write_record([l.to_string(), p.to_string(), d.map_or(String::new(), |v| v.to_string()), extrapolated.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
