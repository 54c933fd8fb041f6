//! Dataset CSV: a header naming each band followed by `label`, then one row
//! per sample.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndlayer_core::data::Dataset;

use crate::error::{CliError, Result};

const LABEL_COLUMN: &str = "label";

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, path)
}

/// Parses a dataset; `path` is only used in error messages.
pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let csv_err = |row: usize, column: &str, message: String| CliError::Csv {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message,
    };
    let header = rdr
        .headers()
        .map_err(|e| csv_err(0, "", e.to_string()))?
        .clone();
    let columns: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    if columns.len() < 3 || columns.last().map(String::as_str) != Some(LABEL_COLUMN) {
        return Err(csv_err(
            0,
            columns.last().map_or("", String::as_str),
            "header must name at least two bands followed by `label`".into(),
        ));
    }
    let band_names = columns[..columns.len() - 1].to_vec();
    let n = band_names.len();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| csv_err(row, "", e.to_string()))?;
        if record.len() != n + 1 {
            return Err(csv_err(row, "", format!("expected {} fields, found {}", n + 1, record.len())));
        }
        for (field, name) in record.iter().zip(&band_names) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| csv_err(row, name, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(csv_err(row, name, format!("non-finite value {field:?}")));
            }
            if v < 0.0 {
                return Err(csv_err(row, name, format!("negative reflectance {v}")));
            }
            values.push(v);
        }
        let label = match record[n].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(csv_err(row, LABEL_COLUMN, format!("label must be 0 or 1, found {other:?}"))),
        };
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(csv_err(0, "", "no data rows".into()));
    }
    Ok(Dataset::new(band_names, values, labels)?)
}

pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(ds, file).map_err(|e| CliError::io(path, e))
}

/// Writes values with the shortest representation that parses back to the
/// same `f64`.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.band_names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    wtr.write_record(&header)?;
    let mut fields = Vec::with_capacity(ds.n_bands() + 1);
    for (row, label) in ds.iter() {
        fields.clear();
        fields.extend(row.iter().map(|v| v.to_string()));
        fields.push(label.to_string());
        wtr.write_record(&fields)?;
    }
    wtr.flush()
}

/// Reads and validates a synthetic-data spec (JSON mirroring `SynthSpec`).
pub fn load_synth_spec(path: &Path) -> Result<ndlayer_core::data::SynthSpec> {
    let spec: ndlayer_core::data::SynthSpec = crate::run::read_json(path)?;
    spec.validate()
        .map_err(|e| CliError::format(path, e.to_string()))?;
    Ok(spec)
}
