//! Files written by the commands: CSV tables, JSON documents and field
//! checkpoints.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use singscat_core::cavity::{LatticeModel, SimulationState};

use crate::error::CliError;

/// 17 significant digits, so every value parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| num(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes the field as CSV: a `n_sites,dx,t` header line and its values,
/// then one `re,im` row per site.
pub fn write_checkpoint(
    path: &Path,
    model: &LatticeModel,
    state: &SimulationState,
) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    w.write_record(["n_sites", "dx", "t"])?;
    w.write_record([model.n_sites.to_string(), num(model.dx), num(state.t())])?;
    w.write_record(["re", "im"])?;
    for z in state.amplitudes() {
        w.write_record([num(z.re), num(z.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path, model: &LatticeModel) -> Result<SimulationState, CliError> {
    let bad = |msg: String| CliError::validation(format!("{}: {msg}", path.display()));
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let rows: Vec<csv::StringRecord> = r.records().collect::<Result<_, _>>()?;
    if rows.len() < 3 || rows[0].iter().collect::<Vec<_>>() != ["n_sites", "dx", "t"] {
        return Err(bad("missing n_sites,dx,t header".into()));
    }
    let field = |row: &csv::StringRecord, i: usize| -> Result<f64, CliError> {
        row.get(i)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| bad(format!("unreadable value in row {row:?}")))
    };
    let n_sites: usize = rows[1]
        .get(0)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("unreadable n_sites".into()))?;
    let (dx, t) = (field(&rows[1], 1)?, field(&rows[1], 2)?);
    if n_sites != model.n_sites || dx != model.dx {
        return Err(bad(format!(
            "checkpoint has {n_sites} sites at dx = {dx}, the scene has {} at dx = {}",
            model.n_sites, model.dx
        )));
    }
    let amps = rows[3..]
        .iter()
        .map(|row| Ok(Complex64::new(field(row, 0)?, field(row, 1)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SimulationState::new(model, amps, t)?)
}
