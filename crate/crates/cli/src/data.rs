//! CSV input: a header row, the response in the first column, regressors in
//! the rest.

use std::fs::File;
use std::path::Path;

use lava_core::lasso::{normalize_design, DesignMatrix};
use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, CliResult};

pub struct Dataset {
    pub names: Vec<String>,
    pub y: DVector<f64>,
    /// Regressors as read, before any normalization.
    pub x: DMatrix<f64>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn design(&self, normalize: bool) -> CliResult<DesignMatrix> {
        let d = if normalize { normalize_design(&self.x) } else { DesignMatrix::unnormalized(self.x.clone()) };
        Ok(d?)
    }
}

/// Reads a data file; diagnostics name the 1-based line and column.
pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::input(format!("{}: cannot read header: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 {
        return Err(CliError::input(format!(
            "{}: need a response column and at least one regressor, header has {} column(s)",
            path.display(),
            header.len()
        )));
    }
    let width = header.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| CliError::input(format!("{}: line {line}: {e}", path.display())))?;
        if record.len() != width {
            return Err(CliError::input(format!(
                "{}: line {line} has {} field(s), header has {width}",
                path.display(),
                record.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::input(format!(
                    "{}: line {line}, column {} ({}): cannot parse {cell:?} as a number",
                    path.display(),
                    j + 1,
                    header[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::input(format!(
                    "{}: line {line}, column {} ({}): value {cell:?} is not finite",
                    path.display(),
                    j + 1,
                    header[j]
                )));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(CliError::input(format!("{}: need at least two data rows, found {rows}", path.display())));
    }
    let all = DMatrix::from_row_slice(rows, width, &values);
    Ok(Dataset { names: header, y: all.column(0).into_owned(), x: all.columns(1, width - 1).into_owned() })
}

/// Reads a single-column vector file, with or without a header line.
pub fn read_vector(path: &Path, expected: usize) -> CliResult<DVector<f64>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let cell = raw.split(',').next_back().unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(CliError::input(format!("{}: line {}: value is not finite", path.display(), i + 1))),
            // A non-numeric first line is a header.
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(CliError::input(format!(
                    "{}: line {}: cannot parse {cell:?} as a number",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if out.len() != expected {
        return Err(CliError::input(format!("{}: expected {expected} values, found {}", path.display(), out.len())));
    }
    Ok(DVector::from_vec(out))
}
