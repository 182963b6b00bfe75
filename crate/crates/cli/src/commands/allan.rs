use std::path::Path;

use hompolar::stats::{deviation_vs_sample_size, loglog_slope, Deviation};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{meta_num, Cell, Table};

pub const COLUMNS: [&str; 3] = ["size", "std_deg", "allan_deg"];

/// Reads one numeric column of a CSV file; `#` lines are comments, so
/// `track` output can be fed in directly.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| CliError::Input(format!("{}: no column {column:?}", path.display())))?;
    let mut values = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let field = rec.get(idx).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| {
            CliError::Input(format!(
                "{}: record {}: {field:?} is not a number",
                path.display(),
                line + 1
            ))
        })?;
        if !v.is_finite() {
            return Err(CliError::Input(format!(
                "{}: record {}: non-finite value",
                path.display(),
                line + 1
            )));
        }
        values.push(v);
    }
    Ok(values)
}

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    let input = cfg
        .allan
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config("allan needs an input file".into()))?;
    if cfg.allan.sizes.is_empty() || cfg.allan.sizes.contains(&0) {
        return Err(CliError::Config(
            "sizes must be a non-empty list of positive integers".into(),
        ));
    }
    let values = read_column(input, &cfg.allan.column)?;
    let rows = deviation_vs_sample_size(&values, &cfg.allan.sizes)?;

    let mut table = Table::new(COLUMNS.to_vec());
    table.header.push(("samples", values.len().into()));
    for r in &rows {
        table.push(vec![
            Cell::Int(r.size as u64),
            Cell::Num(r.std_of_means),
            Cell::Num(r.allan_of_means),
        ]);
    }
    // undefined with fewer than three sizes or a zero deviation (constant input)
    let slope = |which| loglog_slope(&rows, which).ok().map(|f| f.slope);
    table
        .footer
        .push(("std_loglog_slope", meta_num(slope(Deviation::Standard))));
    table
        .footer
        .push(("allan_loglog_slope", meta_num(slope(Deviation::Allan))));
    Ok(table)
}
