//! CSV readers for dense and sparse curve files.
//!
//! Dense: one curve per row. An optional first row `#grid,t1,…,tp` fixes the
//! grid; otherwise the grid is `p` equidistant points on `[0, 1]`. A trailing
//! `label` cell in the grid row (or `labeled = true`) marks the last column
//! as 0/1 outlier labels.
//!
//! Sparse: header `curve_id,t,value`, one observation per row.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use nalgebra::DMatrix;

use crate::coeff::{SparseCurve, SparseCurves};
use crate::error::{MrctError, Result};
use crate::funcdata::{FunctionalSample, Grid};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(None)
        .from_reader(input)
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn csv_error(e: csv::Error) -> MrctError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    MrctError::parse(line, e.to_string())
}

fn number(cell: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| MrctError::parse(line, format!("{what} '{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(MrctError::parse(line, format!("{what} '{cell}' is not finite")));
    }
    Ok(v)
}

/// Reads a dense curve file.
pub fn ingest_dense<R: Read>(input: R, labeled: bool) -> Result<FunctionalSample> {
    let mut grid_points: Option<Vec<f64>> = None;
    let mut has_labels = labeled;
    let mut width: Option<usize> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    let mut rows = 0usize;

    for (i, record) in reader(input).records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if i == 0 && record.get(0) == Some("#grid") {
            let mut cells: Vec<&str> = record.iter().skip(1).collect();
            if cells.last() == Some(&"label") {
                cells.pop();
                has_labels = true;
            }
            let pts = cells
                .iter()
                .map(|c| number(c, line, "grid point"))
                .collect::<Result<Vec<f64>>>()?;
            if pts.len() < 2 {
                return Err(MrctError::parse(line, "grid row needs at least two points"));
            }
            if let Some(w) = pts.windows(2).find(|w| !(w[0] < w[1])) {
                return Err(MrctError::parse(
                    line,
                    format!("grid is not strictly increasing ({} then {})", w[0], w[1]),
                ));
            }
            width = Some(pts.len() + has_labels as usize);
            grid_points = Some(pts);
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(MrctError::parse(
                line,
                format!("expected {expected} columns, found {}", record.len()),
            ));
        }
        let data_cols = expected - has_labels as usize;
        for c in record.iter().take(data_cols) {
            values.push(number(c, line, "value")?);
        }
        if has_labels {
            match &record[expected - 1] {
                "0" => labels.push(false),
                "1" => labels.push(true),
                other => {
                    return Err(MrctError::parse(line, format!("label '{other}' is not 0 or 1")))
                }
            }
        }
        rows += 1;
    }

    if rows == 0 {
        return Err(MrctError::parse(1, "no curves in input"));
    }
    let p = width.unwrap() - has_labels as usize;
    let grid = match grid_points {
        Some(pts) => Grid::new(pts)?,
        None => Grid::equidistant(p, 0.0, 1.0).map_err(|e| MrctError::parse(1, e.to_string()))?,
    };
    let matrix = DMatrix::from_row_slice(rows, p, &values);
    FunctionalSample::new(grid, matrix, has_labels.then_some(labels))
}

/// Reads a sparse `curve_id,t,value` file; curves keep first-appearance order.
pub fn ingest_sparse<R: Read>(input: R) -> Result<SparseCurves> {
    let mut records = reader(input).into_records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(MrctError::parse(1, "empty input")),
    };
    let names: Vec<&str> = header.iter().collect();
    if names != ["curve_id", "t", "value"] {
        return Err(MrctError::parse(
            line_of(&header),
            format!("expected header 'curve_id,t,value', found '{}'", names.join(",")),
        ));
    }

    let mut curves: Vec<SparseCurve> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut seen: HashSet<(usize, u64)> = HashSet::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if record.len() != 3 {
            return Err(MrctError::parse(
                line,
                format!("expected 3 columns, found {}", record.len()),
            ));
        }
        let id = &record[0];
        if id.is_empty() {
            return Err(MrctError::parse(line, "empty curve id"));
        }
        let t = number(&record[1], line, "time")?;
        let v = number(&record[2], line, "value")?;
        let slot = *index.entry(id.to_string()).or_insert_with(|| {
            curves.push(SparseCurve { id: id.to_string(), times: Vec::new(), values: Vec::new() });
            curves.len() - 1
        });
        // `+ 0.0` folds -0 into 0 so both spellings count as the same time.
        if !seen.insert((slot, (t + 0.0).to_bits())) {
            return Err(MrctError::parse(line, format!("curve {id} observed twice at t = {t}")));
        }
        curves[slot].times.push(t);
        curves[slot].values.push(v);
    }
    if curves.is_empty() {
        return Err(MrctError::parse(1, "no observations in input"));
    }
    SparseCurves::new(curves)
}
