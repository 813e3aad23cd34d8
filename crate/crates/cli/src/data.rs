use std::path::Path;

use anyhow::{bail, Context, Result};
use hybridcast::TimeSeries;

/// Reads one numeric column (and optionally a date column) from a CSV file
/// with a header row. An empty `date_column` means the file has no dates.
pub fn load_csv(path: &Path, date_column: &str, value_column: &str) -> Result<TimeSeries> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader
        .headers()
        .with_context(|| format!("{}: cannot read header row", path.display()))?
        .clone();
    let find = |name: &str| {
        headers.iter().position(|h| h.trim() == name).with_context(|| {
            let available: Vec<&str> = headers.iter().collect();
            format!(
                "{}: no column {name:?}; available columns: {}",
                path.display(),
                available.join(", ")
            )
        })
    };
    let value_idx = find(value_column)?;
    let date_idx = if date_column.is_empty() {
        None
    } else {
        Some(find(date_column)?)
    };

    let mut values = Vec::new();
    let mut dates = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("{}: malformed row", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = record.get(value_idx).unwrap_or("").trim();
        let value: f64 = field
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .with_context(|| format!("{}:{line}: value {field:?} is not a number", path.display()))?;
        values.push(value);
        if let Some(i) = date_idx {
            dates.push(record.get(i).unwrap_or("").trim().to_string());
        }
    }
    if values.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let label = value_column.to_string();
    Ok(TimeSeries::with_label(values, date_idx.map(|_| dates), label)?)
}

/// Writes `date,value` rows. Without dates the row index stands in,
/// zero-padded so the strings still sort in order.
pub fn write_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    writer.write_record(["date", "value"])?;
    let width = (series.len() - 1).to_string().len();
    for (i, v) in series.values().iter().enumerate() {
        let date = series.date(i).map_or_else(|| format!("{i:0width$}"), str::to_string);
        writer.write_record([date, v.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
